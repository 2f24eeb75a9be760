#include <doctest.h>

#include "vims/factors.hpp"
#include "vims/rng.hpp"

using namespace vims;

namespace {

constexpr double kStep = 1e-6;

Vec3 rvec(Rng& rng, double s) {
  return s * Vec3(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0,
                  2.0 * rng.uniform() - 1.0);
}

NavState random_state(Rng& rng) {
  NavState x;
  x.p = rvec(rng, 4.0);
  x.v = rvec(rng, 0.5);
  x.q = so3_exp(rvec(rng, 1.2));
  x.ba = rvec(rng, 0.05);
  x.bg = rvec(rng, 0.01);
  return x;
}

Pose3 random_pose(Rng& rng) { return Pose3(so3_exp(rvec(rng, 1.5)), rvec(rng, 4.0)); }

double rel_err(const MatX& analytic, const MatX& fd) {
  return (analytic - fd).norm() / std::max(1.0, fd.norm());
}

// Pose perturbation on [dp, dtheta].
Pose3 perturb(const Pose3& T, int dim, double eps) {
  Pose3 out = T;
  if (dim < 3) {
    out.t[dim] += eps;
  } else {
    Vec3 d = Vec3::Zero();
    d[dim - 3] = eps;
    out.q = (out.q * so3_exp(d)).normalized();
  }
  return out;
}

PreintegratedImu random_preintegration(Rng& rng, const Vec3& ba_lin, const Vec3& bg_lin) {
  SensorNoiseSpec noise;
  ImuPreintegrator integ(ba_lin, bg_lin, noise);
  const double rate = 200.0;
  const Vec3 w0 = rvec(rng, 0.4);
  const Vec3 a0 = rvec(rng, 0.6);
  for (int i = 0; i <= 60; ++i) {
    const double t = i / rate;
    ImuSample s;
    s.t = t;
    s.gyro = w0 + Vec3(0.2 * std::sin(5.0 * t), -0.1 * std::cos(3.0 * t), 0.05);
    s.accel = a0 + Vec3(0.1, 0.3 * std::sin(4.0 * t), 9.8);
    integ.push(s);
  }
  return integ.result();
}

}  // namespace

TEST_CASE("imu factor jacobians match finite differences") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 ba_lin = rvec(rng, 0.05);
    const Vec3 bg_lin = rvec(rng, 0.01);
    const PreintegratedImu pre = random_preintegration(rng, ba_lin, bg_lin);
    ImuFactor factor;
    factor.pre = &pre;

    NavState xi = random_state(rng);
    NavState xj = random_state(rng);

    Mat15 Ji, Jj;
    factor.jacobians(xi, xj, Ji, Jj);

    Mat15 fd_i, fd_j;
    for (int d = 0; d < 15; ++d) {
      Vec15 dv = Vec15::Zero();
      dv[d] = kStep;
      NavState xp = xi, xm = xi;
      xp.retract(dv);
      xm.retract(-dv);
      fd_i.col(d) = (factor.residual(xp, xj) - factor.residual(xm, xj)) / (2.0 * kStep);
      NavState yp = xj, ym = xj;
      yp.retract(dv);
      ym.retract(-dv);
      fd_j.col(d) = (factor.residual(xi, yp) - factor.residual(xi, ym)) / (2.0 * kStep);
    }
    CHECK(rel_err(Ji, fd_i) < 1e-4);
    CHECK(rel_err(Jj, fd_j) < 1e-4);
  }
}

TEST_CASE("reprojection factor jacobians match finite differences") {
  Rng rng(103);
  int done = 0;
  while (done < 100) {
    ReprojectionFactor f;
    f.T_bc = Pose3(so3_exp(Vec3(M_PI, 0.0, 0.0) + rvec(rng, 0.05)), rvec(rng, 0.1));
    f.anchor_ray = (Vec3(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 1.0)).normalized();
    f.observed = Vec2(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));

    // Anchor above the floor looking down; observer nearby.
    const Pose3 T_a(so3_exp(rvec(rng, 0.3)), Vec3(rvec(rng, 1.0).x(), rvec(rng, 1.0).y(), 3.0));
    const Pose3 T_j(so3_exp(rvec(rng, 0.3)), T_a.t + rvec(rng, 0.5));
    const double lambda = rng.uniform(2.0, 6.0);

    Eigen::Matrix<double, 2, 6> Ja, Jj;
    Vec2 Jl;
    if (!f.jacobians(T_a, T_j, lambda, Ja, Jj, Jl)) continue;

    Eigen::Matrix<double, 2, 6> fd_a, fd_j;
    Vec2 fd_l;
    bool ok = true;
    for (int d = 0; d < 6 && ok; ++d) {
      auto rp = f.residual(perturb(T_a, d, kStep), T_j, lambda);
      auto rm = f.residual(perturb(T_a, d, -kStep), T_j, lambda);
      auto sp = f.residual(T_a, perturb(T_j, d, kStep), lambda);
      auto sm = f.residual(T_a, perturb(T_j, d, -kStep), lambda);
      ok = rp && rm && sp && sm;
      if (!ok) break;
      fd_a.col(d) = (*rp - *rm) / (2.0 * kStep);
      fd_j.col(d) = (*sp - *sm) / (2.0 * kStep);
    }
    if (!ok) continue;
    auto lp = f.residual(T_a, T_j, lambda + kStep);
    auto lm = f.residual(T_a, T_j, lambda - kStep);
    if (!lp || !lm) continue;
    fd_l = (*lp - *lm) / (2.0 * kStep);

    CHECK(rel_err(Ja, fd_a) < 1e-4);
    CHECK(rel_err(Jj, fd_j) < 1e-4);
    CHECK(rel_err(Jl, fd_l) < 1e-4);
    ++done;
  }
}

TEST_CASE("sonar altitude factor jacobians match finite differences") {
  Rng rng(107);
  for (int trial = 0; trial < 100; ++trial) {
    SonarAltitudeFactor f;
    f.T_bs = Pose3(so3_exp(Vec3(M_PI, 0.0, 0.0) + rvec(rng, 0.05)), rvec(rng, 0.1));
    f.T_bc = Pose3(so3_exp(Vec3(M_PI, 0.0, 0.0) + rvec(rng, 0.05)), rvec(rng, 0.1));
    f.anchor_ray = (Vec3(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 1.0)).normalized();
    f.range = rng.uniform(2.0, 5.0);

    const Pose3 T_k(so3_exp(rvec(rng, 0.3)), rvec(rng, 3.0));
    const Pose3 T_a(so3_exp(rvec(rng, 0.3)), rvec(rng, 3.0));
    const double lambda = rng.uniform(1.0, 6.0);

    Eigen::Matrix<double, 1, 6> Jk, Ja;
    double Jl;
    f.jacobians(T_k, T_a, lambda, Jk, Ja, Jl);

    Eigen::Matrix<double, 1, 6> fd_k, fd_a;
    for (int d = 0; d < 6; ++d) {
      fd_k(0, d) = (f.residual(perturb(T_k, d, kStep), T_a, lambda) -
                    f.residual(perturb(T_k, d, -kStep), T_a, lambda)) /
                   (2.0 * kStep);
      fd_a(0, d) = (f.residual(T_k, perturb(T_a, d, kStep), lambda) -
                    f.residual(T_k, perturb(T_a, d, -kStep), lambda)) /
                   (2.0 * kStep);
    }
    const double fd_l = (f.residual(T_k, T_a, lambda + kStep) -
                         f.residual(T_k, T_a, lambda - kStep)) /
                        (2.0 * kStep);
    CHECK(rel_err(Jk, fd_k) < 1e-4);
    CHECK(rel_err(Ja, fd_a) < 1e-4);
    CHECK(std::abs(Jl - fd_l) / std::max(1.0, std::abs(fd_l)) < 1e-4);

    // Affine in lambda: second difference vanishes.
    const double r0 = f.residual(T_k, T_a, lambda - 0.5);
    const double r1 = f.residual(T_k, T_a, lambda);
    const double r2 = f.residual(T_k, T_a, lambda + 0.5);
    CHECK(std::abs(r2 - 2.0 * r1 + r0) < 1e-12);
  }
}

TEST_CASE("relative pose factor residual and jacobians") {
  SUBCASE("consistent poses give zero residual") {
    Rng rng(109);
    const Pose3 Ti = random_pose(rng);
    const Pose3 Tj = random_pose(rng);
    RelativePoseFactor f;
    f.z = Ti.inverse() * Tj;
    CHECK(f.residual(Ti, Tj).norm() < 1e-12);
  }

  SUBCASE("pure x offset") {
    RelativePoseFactor f;
    f.z = Pose3::identity();
    const Pose3 Ti = Pose3::identity();
    const Pose3 Tj(Quat::Identity(), Vec3(1.0, 0.0, 0.0));
    const Vec6 r = f.residual(Ti, Tj);
    CHECK((r - (Vec6() << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0).finished()).norm() < 1e-14);
  }

  SUBCASE("matrix oracle") {
    Rng rng(113);
    for (int trial = 0; trial < 50; ++trial) {
      const Pose3 Ti = random_pose(rng);
      const Pose3 Tj = random_pose(rng);
      RelativePoseFactor f;
      f.z = random_pose(rng);
      const Vec6 r = f.residual(Ti, Tj);

      // brute-force with 4x4 homogeneous matrices
      Eigen::Matrix4d Mi = Eigen::Matrix4d::Identity(), Mj = Eigen::Matrix4d::Identity(),
                      Mz = Eigen::Matrix4d::Identity();
      Mi.topLeftCorner<3, 3>() = Ti.rotation();
      Mi.topRightCorner<3, 1>() = Ti.t;
      Mj.topLeftCorner<3, 3>() = Tj.rotation();
      Mj.topRightCorner<3, 1>() = Tj.t;
      Mz.topLeftCorner<3, 3>() = f.z.rotation();
      Mz.topRightCorner<3, 1>() = f.z.t;
      const Eigen::Matrix4d Mij = Mi.inverse() * Mj;
      const Vec3 t_split = Mij.topRightCorner<3, 1>() - Mz.topRightCorner<3, 1>();
      const Mat3 R_err = Mz.topLeftCorner<3, 3>().transpose() * Mij.topLeftCorner<3, 3>();
      const Vec3 r_rot = so3_log(Quat(R_err));
      CHECK((r.head<3>() - t_split).norm() < 1e-10);
      CHECK((r.tail<3>() - r_rot).norm() < 1e-10);
    }
  }

  SUBCASE("jacobians match finite differences") {
    Rng rng(127);
    for (int trial = 0; trial < 100; ++trial) {
      const Pose3 Ti = random_pose(rng);
      const Pose3 Tj = random_pose(rng);
      RelativePoseFactor f;
      f.z = random_pose(rng);
      Mat6 Ji, Jj;
      f.jacobians(Ti, Tj, Ji, Jj);
      Mat6 fd_i, fd_j;
      for (int d = 0; d < 6; ++d) {
        fd_i.col(d) = (f.residual(perturb(Ti, d, kStep), Tj) -
                       f.residual(perturb(Ti, d, -kStep), Tj)) /
                      (2.0 * kStep);
        fd_j.col(d) = (f.residual(Ti, perturb(Tj, d, kStep)) -
                       f.residual(Ti, perturb(Tj, d, -kStep))) /
                      (2.0 * kStep);
      }
      CHECK(rel_err(Ji, fd_i) < 1e-4);
      CHECK(rel_err(Jj, fd_j) < 1e-4);
    }
  }
}

TEST_CASE("magnetometer factor") {
  const Vec3 B(0.0, 30.0, -40.0);

  SUBCASE("true orientation gives zero residual") {
    const Quat q = so3_exp(Vec3(0.1, 0.2, -0.3));
    MagnetometerFactor f;
    f.field_world = B;
    f.measured_body = q.conjugate() * B;
    CHECK(f.residual(q).norm() < 1e-12);
  }

  SUBCASE("10 degree yaw error matches the closed form") {
    const double err = 10.0 * M_PI / 180.0;
    const Quat q_true = Quat::Identity();
    const Quat q_est = yaw_quat(err);
    MagnetometerFactor f;
    f.field_world = B;
    f.measured_body = q_true.conjugate() * B;
    const double expected = ((yaw_quat(err).toRotationMatrix().transpose() -
                              Mat3::Identity()) *
                             B)
                                .norm();
    CHECK(f.residual(q_est).norm() == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("jacobian matches finite differences") {
    Rng rng(131);
    for (int trial = 0; trial < 100; ++trial) {
      const Quat q = so3_exp(rvec(rng, 1.5));
      MagnetometerFactor f;
      f.field_world = B;
      f.measured_body = rvec(rng, 30.0);
      const Mat3 J = f.jacobian_theta(q);
      Mat3 fd;
      for (int d = 0; d < 3; ++d) {
        Vec3 dv = Vec3::Zero();
        dv[d] = kStep;
        fd.col(d) = (f.residual((q * so3_exp(dv)).normalized()) -
                     f.residual((q * so3_exp(-dv)).normalized())) /
                    (2.0 * kStep);
      }
      CHECK(rel_err(J, fd) < 1e-4);
    }
  }
}

TEST_CASE("pose prior factor jacobian") {
  Rng rng(137);
  for (int trial = 0; trial < 50; ++trial) {
    PosePriorFactor f;
    f.z = random_pose(rng);
    const Pose3 T = random_pose(rng);
    const Mat6 J = f.jacobian(T);
    Mat6 fd;
    for (int d = 0; d < 6; ++d) {
      fd.col(d) =
          (f.residual(perturb(T, d, kStep)) - f.residual(perturb(T, d, -kStep))) /
          (2.0 * kStep);
    }
    CHECK(rel_err(J, fd) < 1e-4);
  }
}
