#pragma once

#include <optional>

#include "vims/geometry.hpp"
#include "vims/nav_state.hpp"
#include "vims/preintegration.hpp"

namespace vims {

// Residuals and hand-derived Jacobians for every factor in the system.
// Rotation states perturb on the right: q -> q * exp(dtheta). All Jacobian
// blocks follow the error order [dp, dtheta, dv, dba, dbg] where relevant.

// ---------------------------------------------------------------------------
// Preintegrated IMU factor between consecutive window states.
struct ImuFactor {
  const PreintegratedImu* pre = nullptr;
  Vec3 gravity = Vec3(0.0, 0.0, -9.80665);  // local frame

  Vec15 residual(const NavState& xi, const NavState& xj) const {
    const double dt = pre->dt_total;
    const Mat3 Ri_t = xi.q.conjugate().toRotationMatrix();
    Vec15 r;
    r.segment<3>(0) =
        Ri_t * (xj.p - xi.p - xi.v * dt - 0.5 * gravity * dt * dt) -
        pre->corrected_delta_p(xi.ba, xi.bg);
    const Quat gamma = pre->corrected_delta_q(xi.bg);
    r.segment<3>(3) = so3_log(gamma.conjugate() * xi.q.conjugate() * xj.q);
    r.segment<3>(6) = Ri_t * (xj.v - xi.v - gravity * dt) -
                      pre->corrected_delta_v(xi.ba, xi.bg);
    r.segment<3>(9) = xj.ba - xi.ba;
    r.segment<3>(12) = xj.bg - xi.bg;
    return r;
  }

  void jacobians(const NavState& xi, const NavState& xj, Mat15& Ji, Mat15& Jj) const {
    const double dt = pre->dt_total;
    const Mat3 Ri_t = xi.q.conjugate().toRotationMatrix();
    const Mat3 I = Mat3::Identity();
    Ji.setZero();
    Jj.setZero();

    const Vec3 s_p = xj.p - xi.p - xi.v * dt - 0.5 * gravity * dt * dt;
    const Vec3 s_v = xj.v - xi.v - gravity * dt;

    // r_p rows
    Ji.block<3, 3>(0, 0) = -Ri_t;
    Ji.block<3, 3>(0, 3) = skew(Ri_t * s_p);
    Ji.block<3, 3>(0, 6) = -Ri_t * dt;
    Ji.block<3, 3>(0, 9) = -pre->dp_dba();
    Ji.block<3, 3>(0, 12) = -pre->dp_dbg();
    Jj.block<3, 3>(0, 0) = Ri_t;

    // r_theta rows
    const Quat gamma = pre->corrected_delta_q(xi.bg);
    const Quat A = xi.q.conjugate() * xj.q;
    const Vec3 r_theta = so3_log(gamma.conjugate() * A);
    const Mat3 Jr_inv = so3_right_jacobian_inv(r_theta);
    Ji.block<3, 3>(3, 3) = -Jr_inv * A.conjugate().toRotationMatrix();
    {
      const Vec3 u = pre->dq_dbg() * (xi.bg - pre->bg_lin);
      const Quat C = pre->delta_q.conjugate() * A;
      Ji.block<3, 3>(3, 12) = -Jr_inv * C.conjugate().toRotationMatrix() *
                              so3_right_jacobian(-u) * pre->dq_dbg();
    }
    Jj.block<3, 3>(3, 3) = Jr_inv;

    // r_v rows
    Ji.block<3, 3>(6, 3) = skew(Ri_t * s_v);
    Ji.block<3, 3>(6, 6) = -Ri_t;
    Ji.block<3, 3>(6, 9) = -pre->dv_dba();
    Ji.block<3, 3>(6, 12) = -pre->dv_dbg();
    Jj.block<3, 3>(6, 6) = Ri_t;

    // bias random-walk rows
    Ji.block<3, 3>(9, 9) = -I;
    Ji.block<3, 3>(12, 12) = -I;
    Jj.block<3, 3>(9, 9) = I;
    Jj.block<3, 3>(12, 12) = I;
  }
};

// ---------------------------------------------------------------------------
// Reprojection of a depth-parametrized feature into another window frame.
// The feature lives at lambda meters along its anchor camera ray.
struct ReprojectionFactor {
  Pose3 T_bc;       // body <- camera extrinsic
  Vec3 anchor_ray;  // unit ray in the anchor camera frame
  Vec2 observed;    // normalized coords in the observing frame

  static constexpr double kMinDepth = 0.05;  // behind-camera guard, m

  // Point in the local frame given the anchor body pose.
  Vec3 point_local(const Pose3& T_a, double lambda) const {
    return T_a * (T_bc * (lambda * anchor_ray));
  }

  std::optional<Vec2> residual(const Pose3& T_a, const Pose3& T_j, double lambda) const {
    const Vec3 x_l = point_local(T_a, lambda);
    const Vec3 x_bj = T_j.q.conjugate() * (x_l - T_j.t);
    const Vec3 x_cj = T_bc.q.conjugate() * (x_bj - T_bc.t);
    if (x_cj.z() < kMinDepth) return std::nullopt;
    return Vec2(x_cj.x() / x_cj.z() - observed.x(), x_cj.y() / x_cj.z() - observed.y());
  }

  // Blocks: [dp_a, dtheta_a], [dp_j, dtheta_j], dlambda.
  bool jacobians(const Pose3& T_a, const Pose3& T_j, double lambda,
                 Eigen::Matrix<double, 2, 6>& Ja, Eigen::Matrix<double, 2, 6>& Jj,
                 Vec2& Jlambda) const {
    const Vec3 x_ba = T_bc * (lambda * anchor_ray);
    const Vec3 x_l = T_a * x_ba;
    const Mat3 Rj_t = T_j.q.conjugate().toRotationMatrix();
    const Vec3 x_bj = Rj_t * (x_l - T_j.t);
    const Mat3 Rbc_t = T_bc.q.conjugate().toRotationMatrix();
    const Vec3 x_cj = Rbc_t * (x_bj - T_bc.t);
    if (x_cj.z() < kMinDepth) return false;

    Eigen::Matrix<double, 2, 3> P;
    const double iz = 1.0 / x_cj.z();
    P << iz, 0.0, -x_cj.x() * iz * iz, 0.0, iz, -x_cj.y() * iz * iz;

    const Eigen::Matrix<double, 2, 3> PRbcRj = P * Rbc_t * Rj_t;
    const Mat3 Ra = T_a.q.toRotationMatrix();

    Ja.block<2, 3>(0, 0) = PRbcRj;
    Ja.block<2, 3>(0, 3) = -PRbcRj * Ra * skew(x_ba);
    Jj.block<2, 3>(0, 0) = -PRbcRj;
    Jj.block<2, 3>(0, 3) = P * Rbc_t * skew(x_bj);
    Jlambda = PRbcRj * (Ra * (T_bc.q * anchor_ray));
    return true;
  }
};

// ---------------------------------------------------------------------------
// Flat-bottom altitude constraint: the feature's local-frame height must
// match the sonar-measured seabed height at frame k.
struct SonarAltitudeFactor {
  Pose3 T_bs;       // body <- sonar extrinsic
  Pose3 T_bc;       // body <- camera extrinsic (anchor chain)
  Vec3 anchor_ray;  // unit ray in the anchor camera frame
  double range = 0.0;  // filtered sonar range at frame k

  double residual(const Pose3& T_k, const Pose3& T_a, double lambda) const {
    const Vec3 hit_l = T_k * (T_bs * Vec3(0.0, 0.0, range));
    const Vec3 x_l = T_a * (T_bc * (lambda * anchor_ray));
    return hit_l.z() - x_l.z();
  }

  // Blocks: [dp_k, dtheta_k], [dp_a, dtheta_a], dlambda.
  void jacobians(const Pose3& T_k, const Pose3& T_a, double lambda,
                 Eigen::Matrix<double, 1, 6>& Jk, Eigen::Matrix<double, 1, 6>& Ja,
                 double& Jlambda) const {
    const Vec3 s_b = T_bs * Vec3(0.0, 0.0, range);
    const Vec3 x_ba = T_bc * (lambda * anchor_ray);
    const Eigen::RowVector3d ez(0.0, 0.0, 1.0);
    const Mat3 Rk = T_k.q.toRotationMatrix();
    const Mat3 Ra = T_a.q.toRotationMatrix();
    Jk.block<1, 3>(0, 0) = ez;
    Jk.block<1, 3>(0, 3) = -ez * Rk * skew(s_b);
    Ja.block<1, 3>(0, 0) = -ez;
    Ja.block<1, 3>(0, 3) = ez * Ra * skew(x_ba);
    Jlambda = -(ez * (Ra * (T_bc.q * anchor_ray)))(0);
  }
};

// ---------------------------------------------------------------------------
// Relative pose measurement (VIO edge or verified loop). Translation is
// expressed in frame i, rotation via so3_log.
struct RelativePoseFactor {
  Pose3 z;  // measured T_i^-1 * T_j

  Vec6 residual(const Pose3& T_i, const Pose3& T_j) const {
    Vec6 r;
    r.segment<3>(0) = T_i.q.conjugate() * (T_j.t - T_i.t) - z.t;
    r.segment<3>(3) = so3_log(z.q.conjugate() * T_i.q.conjugate() * T_j.q);
    return r;
  }

  // Blocks: [dp_i, dtheta_i], [dp_j, dtheta_j].
  void jacobians(const Pose3& T_i, const Pose3& T_j, Mat6& Ji, Mat6& Jj) const {
    Ji.setZero();
    Jj.setZero();
    const Mat3 Ri_t = T_i.q.conjugate().toRotationMatrix();
    const Quat A = T_i.q.conjugate() * T_j.q;
    const Vec3 r_theta = so3_log(z.q.conjugate() * A);
    const Mat3 Jr_inv = so3_right_jacobian_inv(r_theta);
    Ji.block<3, 3>(0, 0) = -Ri_t;
    Ji.block<3, 3>(0, 3) = skew(Ri_t * (T_j.t - T_i.t));
    Ji.block<3, 3>(3, 3) = -Jr_inv * A.conjugate().toRotationMatrix();
    Jj.block<3, 3>(0, 0) = Ri_t;
    Jj.block<3, 3>(3, 3) = Jr_inv;
  }
};

// ---------------------------------------------------------------------------
// Geomagnetic alignment factor: predicted body-frame Earth field against the
// separated magnetometer estimate.
struct MagnetometerFactor {
  Vec3 field_world;  // configured Earth field, ENU, uT
  Vec3 measured_body;

  Vec3 residual(const Quat& q_wb) const {
    return q_wb.conjugate() * field_world - measured_body;
  }

  Mat3 jacobian_theta(const Quat& q_wb) const {
    return skew(q_wb.conjugate() * field_world);
  }
};

// ---------------------------------------------------------------------------
// Pose prior (gauge anchor).
struct PosePriorFactor {
  Pose3 z;

  Vec6 residual(const Pose3& T) const {
    Vec6 r;
    r.segment<3>(0) = T.t - z.t;
    r.segment<3>(3) = so3_log(z.q.conjugate() * T.q);
    return r;
  }

  Mat6 jacobian(const Pose3& T) const {
    Mat6 J = Mat6::Zero();
    J.block<3, 3>(0, 0) = Mat3::Identity();
    J.block<3, 3>(3, 3) = so3_right_jacobian_inv(so3_log(z.q.conjugate() * T.q));
    return J;
  }
};

}  // namespace vims
