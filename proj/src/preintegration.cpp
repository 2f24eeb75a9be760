#include "vims/preintegration.hpp"

namespace vims {

ImuPreintegrator::ImuPreintegrator(const Vec3& ba, const Vec3& bg,
                                   const SensorNoiseSpec& noise)
    : noise_(noise) {
  pre_.ba_lin = ba;
  pre_.bg_lin = bg;
}

void ImuPreintegrator::push(const ImuSample& s) {
  if (count_ == 0) {
    last_ = s;
    ++count_;
    return;
  }
  const double dt = s.t - last_.t;
  if (dt <= 0.0) throw std::invalid_argument("preintegration: timestamps must increase");

  const Vec3 gyro_mid = 0.5 * (last_.gyro + s.gyro) - pre_.bg_lin;
  const Quat q_k = pre_.delta_q;
  const Quat q_k1 = (q_k * so3_exp(gyro_mid * dt)).normalized();
  const Vec3 acc0 = last_.accel - pre_.ba_lin;
  const Vec3 acc1 = s.accel - pre_.ba_lin;
  const Vec3 acc_w0 = q_k * acc0;
  const Vec3 acc_w1 = q_k1 * acc1;
  const Vec3 acc_mid = 0.5 * (acc_w0 + acc_w1);

  const Mat3 R_k = q_k.toRotationMatrix();
  const Mat3 R_k1 = q_k1.toRotationMatrix();
  const Mat3 A0 = skew(acc0);
  const Mat3 A1 = skew(acc1);
  const Mat3 W = skew(gyro_mid);
  const Mat3 I = Mat3::Identity();

  // Discrete error-state transition for the midpoint scheme.
  Mat15 F = Mat15::Identity();
  F.block<3, 3>(0, 3) =
      -0.25 * R_k * A0 * dt * dt - 0.25 * R_k1 * A1 * (I - W * dt) * dt * dt;
  F.block<3, 3>(0, 6) = I * dt;
  F.block<3, 3>(0, 9) = -0.25 * (R_k + R_k1) * dt * dt;
  F.block<3, 3>(0, 12) = 0.25 * R_k1 * A1 * dt * dt * dt;
  F.block<3, 3>(3, 3) = I - W * dt;
  F.block<3, 3>(3, 12) = -I * dt;
  F.block<3, 3>(6, 3) = -0.5 * R_k * A0 * dt - 0.5 * R_k1 * A1 * (I - W * dt) * dt;
  F.block<3, 3>(6, 9) = -0.5 * (R_k + R_k1) * dt;
  F.block<3, 3>(6, 12) = 0.5 * R_k1 * A1 * dt * dt;

  // Noise input: [na0, ng0, na1, ng1, nba_walk, nbg_walk].
  Eigen::Matrix<double, 15, 18> V = Eigen::Matrix<double, 15, 18>::Zero();
  V.block<3, 3>(0, 0) = 0.25 * R_k * dt * dt;
  V.block<3, 3>(0, 3) = -0.125 * R_k1 * A1 * dt * dt * dt;
  V.block<3, 3>(0, 6) = 0.25 * R_k1 * dt * dt;
  V.block<3, 3>(0, 9) = V.block<3, 3>(0, 3);
  V.block<3, 3>(3, 3) = 0.5 * I * dt;
  V.block<3, 3>(3, 9) = 0.5 * I * dt;
  V.block<3, 3>(6, 0) = 0.5 * R_k * dt;
  V.block<3, 3>(6, 3) = -0.25 * R_k1 * A1 * dt * dt;
  V.block<3, 3>(6, 6) = 0.5 * R_k1 * dt;
  V.block<3, 3>(6, 9) = V.block<3, 3>(6, 3);
  V.block<3, 3>(9, 12) = I * dt;
  V.block<3, 3>(12, 15) = I * dt;

  Eigen::Matrix<double, 18, 18> N = Eigen::Matrix<double, 18, 18>::Zero();
  const double sa2 = noise_.accel_noise_density * noise_.accel_noise_density / dt;
  const double sg2 = noise_.gyro_noise_density * noise_.gyro_noise_density / dt;
  const double swa2 = noise_.accel_bias_walk * noise_.accel_bias_walk / dt;
  const double swg2 = noise_.gyro_bias_walk * noise_.gyro_bias_walk / dt;
  N.diagonal() << sa2, sa2, sa2, sg2, sg2, sg2, sa2, sa2, sa2, sg2, sg2, sg2, swa2,
      swa2, swa2, swg2, swg2, swg2;

  pre_.covariance = F * pre_.covariance * F.transpose() + V * N * V.transpose();

  // Exact first-order bias-Jacobian recurrences. With phi the step rotation
  // vector, gamma(bg + d) = gamma_bar * Exp(J_q_bg d) propagates as
  // J' = Exp(phi)^T J - Jr(phi) dt.
  {
    const Vec3 phi = gyro_mid * dt;
    const Mat3 E_t = so3_exp(-phi).toRotationMatrix();
    const Mat3 Jq_new = E_t * pre_.J_q_bg - so3_right_jacobian(phi) * dt;
    const Mat3 dabar_dba = -0.5 * (R_k + R_k1);
    const Mat3 dabar_dbg = -0.5 * (R_k * A0 * pre_.J_q_bg + R_k1 * A1 * Jq_new);
    pre_.J_p_ba += pre_.J_v_ba * dt + 0.5 * dabar_dba * dt * dt;
    pre_.J_p_bg += pre_.J_v_bg * dt + 0.5 * dabar_dbg * dt * dt;
    pre_.J_v_ba += dabar_dba * dt;
    pre_.J_v_bg += dabar_dbg * dt;
    pre_.J_q_bg = Jq_new;
  }

  pre_.delta_p += pre_.delta_v * dt + 0.5 * acc_mid * dt * dt;
  pre_.delta_v += acc_mid * dt;
  pre_.delta_q = q_k1;
  pre_.dt_total += dt;

  last_ = s;
  ++count_;
}

PreintegratedImu preintegrate(const std::vector<ImuSample>& samples, const Vec3& ba,
                              const Vec3& bg, const SensorNoiseSpec& noise) {
  if (samples.size() < 2) {
    throw std::invalid_argument("preintegration: need at least two samples");
  }
  ImuPreintegrator integ(ba, bg, noise);
  for (const auto& s : samples) integ.push(s);
  return integ.result();
}

PreintegratedImu compose(const PreintegratedImu& a, const PreintegratedImu& b) {
  PreintegratedImu out = a;
  out.dt_total = a.dt_total + b.dt_total;
  out.delta_p = a.delta_p + a.delta_v * b.dt_total + a.delta_q * b.delta_p;
  out.delta_v = a.delta_v + a.delta_q * b.delta_v;
  out.delta_q = (a.delta_q * b.delta_q).normalized();
  return out;
}

}  // namespace vims
