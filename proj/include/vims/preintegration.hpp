#pragma once

#include <stdexcept>
#include <vector>

#include "vims/geometry.hpp"
#include "vims/scenario.hpp"
#include "vims/world.hpp"

namespace vims {

using Mat15 = Eigen::Matrix<double, 15, 15>;
using Vec15 = Eigen::Matrix<double, 15, 1>;

// Error-state ordering used throughout: [dp, dtheta, dv, dba, dbg].
struct PreintegratedImu {
  double dt_total = 0.0;
  Vec3 delta_p = Vec3::Zero();
  Quat delta_q = Quat::Identity();
  Vec3 delta_v = Vec3::Zero();
  Mat15 covariance = Mat15::Zero();
  Vec3 ba_lin = Vec3::Zero();
  Vec3 bg_lin = Vec3::Zero();

  // Bias Jacobians propagated with exact first-order recurrences (the
  // covariance uses the usual truncated transition; these do not).
  Mat3 J_p_ba = Mat3::Zero();
  Mat3 J_p_bg = Mat3::Zero();
  Mat3 J_q_bg = Mat3::Zero();
  Mat3 J_v_ba = Mat3::Zero();
  Mat3 J_v_bg = Mat3::Zero();

  Mat3 dp_dba() const { return J_p_ba; }
  Mat3 dp_dbg() const { return J_p_bg; }
  Mat3 dq_dbg() const { return J_q_bg; }
  Mat3 dv_dba() const { return J_v_ba; }
  Mat3 dv_dbg() const { return J_v_bg; }

  // First-order bias-corrected deltas.
  Quat corrected_delta_q(const Vec3& bg) const {
    return (delta_q * so3_exp(dq_dbg() * (bg - bg_lin))).normalized();
  }
  Vec3 corrected_delta_p(const Vec3& ba, const Vec3& bg) const {
    return delta_p + dp_dba() * (ba - ba_lin) + dp_dbg() * (bg - bg_lin);
  }
  Vec3 corrected_delta_v(const Vec3& ba, const Vec3& bg) const {
    return delta_v + dv_dba() * (ba - ba_lin) + dv_dbg() * (bg - bg_lin);
  }
};

// Midpoint preintegration with 15x15 covariance propagation and first-order
// bias Jacobians. Samples must arrive in strictly increasing time order; the
// first sample anchors the interval.
class ImuPreintegrator {
 public:
  ImuPreintegrator(const Vec3& ba, const Vec3& bg, const SensorNoiseSpec& noise);

  void push(const ImuSample& s);
  std::size_t sample_count() const { return count_; }
  const PreintegratedImu& result() const { return pre_; }

 private:
  PreintegratedImu pre_;
  SensorNoiseSpec noise_;
  ImuSample last_{};
  std::size_t count_ = 0;
};

// Batch convenience: integrate a whole sample run.
PreintegratedImu preintegrate(const std::vector<ImuSample>& samples, const Vec3& ba,
                              const Vec3& bg, const SensorNoiseSpec& noise);

// State composition (covariance not combined; used for the concatenation
// identity).
PreintegratedImu compose(const PreintegratedImu& a, const PreintegratedImu& b);

}  // namespace vims
