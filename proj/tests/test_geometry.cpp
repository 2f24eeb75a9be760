#include <doctest.h>

#include "vims/geometry.hpp"
#include "vims/rng.hpp"

using namespace vims;

namespace {

Mat3 rodrigues(const Vec3& omega) {
  const double t = omega.norm();
  if (t < 1e-12) return Mat3::Identity();
  const Vec3 axis = omega / t;
  const Mat3 K = skew(axis);
  return Mat3::Identity() + std::sin(t) * K + (1.0 - std::cos(t)) * K * K;
}

Vec3 random_vec(Rng& rng, double scale) {
  return scale * Vec3(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0,
                      2.0 * rng.uniform() - 1.0);
}

Pose3 random_pose(Rng& rng) {
  return Pose3(so3_exp(random_vec(rng, 2.0)), random_vec(rng, 5.0));
}

}  // namespace

TEST_CASE("so3_exp basics") {
  CHECK(so3_exp(Vec3::Zero()).isApprox(Quat::Identity()));

  const Quat half_turn = so3_exp(Vec3(0.0, 0.0, M_PI));
  CHECK(std::abs(half_turn.w()) < 1e-12);
  CHECK(std::abs(std::abs(half_turn.z()) - 1.0) < 1e-12);

  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Vec3 omega = random_vec(rng, 1.0).normalized() * 0.3;
    const Mat3 R_quat = so3_exp(omega).toRotationMatrix();
    const Mat3 R_rod = rodrigues(omega);
    CHECK((R_quat - R_rod).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("so3_log basics and round trip") {
  CHECK(so3_log(Quat::Identity()).norm() == doctest::Approx(0.0));
  CHECK((so3_log(so3_exp(Vec3(0.1, 0.0, 0.0))) - Vec3(0.1, 0.0, 0.0)).norm() < 1e-10);

  Rng rng(11);
  double max_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double angle = rng.uniform() * (M_PI - 1e-3);
    const Vec3 omega = random_vec(rng, 1.0).normalized() * angle;
    const Vec3 back = so3_log(so3_exp(omega));
    max_err = std::max(max_err, (back - omega).norm());
  }
  CHECK(max_err < 1e-8);
}

TEST_CASE("so3_log near-pi branch is deterministic") {
  const Quat q = so3_exp(Vec3(0.0, 0.0, M_PI - 1e-12));
  const Vec3 l = so3_log(q);
  CHECK(std::abs(l.norm() - M_PI) < 1e-9);
  // sign flip of the quaternion maps to the same rotation vector
  Quat qn = q;
  qn.coeffs() = -qn.coeffs();
  CHECK((so3_log(qn) - l).norm() < 1e-9);
}

TEST_CASE("transform_point") {
  const Vec3 p(1.0, 2.0, 3.0);
  CHECK((transform_point(Pose3::identity(), p) - p).norm() == doctest::Approx(0.0));

  const Pose3 lift(Quat::Identity(), Vec3(0.0, 0.0, 5.0));
  CHECK((transform_point(lift, Vec3::Zero()) - Vec3(0.0, 0.0, 5.0)).norm() < 1e-15);

  const Pose3 yawed(yaw_quat(M_PI / 2.0), Vec3(1.0, 0.0, 0.0));
  CHECK((transform_point(yawed, Vec3(1.0, 0.0, 0.0)) - Vec3(1.0, 1.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("pose group axioms") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const Pose3 a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Pose3 ab_c = (a * b) * c;
    const Pose3 a_bc = a * (b * c);
    CHECK((ab_c.t - a_bc.t).norm() < 1e-9);
    CHECK(rotation_angle_between(ab_c.q, a_bc.q) < 1e-9);

    const Pose3 ai = a * a.inverse();
    CHECK(ai.t.norm() < 1e-9);
    CHECK(rotation_angle(ai.q) < 1e-9);

    const Vec3 v = random_vec(rng, 3.0);
    CHECK(std::abs((a.q * v).norm() - v.norm()) < 1e-9);
  }
}

TEST_CASE("right jacobian consistency") {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const Vec3 phi = random_vec(rng, 1.5);
    const Mat3 Jr = so3_right_jacobian(phi);
    const Mat3 Jr_inv = so3_right_jacobian_inv(phi);
    CHECK((Jr * Jr_inv - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);

    // Exp(phi + d) ~ Exp(phi) * Exp(Jr d)
    const Vec3 d = random_vec(rng, 1e-6);
    const Quat lhs = so3_exp(phi + d);
    const Quat rhs = so3_exp(phi) * so3_exp(Jr * d);
    CHECK(rotation_angle_between(lhs, rhs) < 1e-10);
  }
}

TEST_CASE("framed pose chains") {
  const FramedPose T_wb(Pose3(yaw_quat(0.3), Vec3(1.0, 0.0, 0.0)), Frame::World, Frame::Body);
  const FramedPose T_bc(Pose3(Quat::Identity(), Vec3(0.1, 0.0, 0.0)), Frame::Body,
                        Frame::Camera);
  const FramedPose T_wc = T_wb * T_bc;
  CHECK((T_wc.pose.t - (T_wb.pose * T_bc.pose.t)).norm() < 1e-15);
  const FramedPose back = T_wc * T_wc.inverse();
  CHECK(back.pose.t.norm() < 1e-12);
}

TEST_CASE("canonical double cover") {
  const Quat q = so3_exp(Vec3(0.2, -0.4, 1.0));
  Quat qn = q;
  qn.coeffs() = -qn.coeffs();
  CHECK(canonical(q).coeffs().isApprox(canonical(qn).coeffs()));
  CHECK(canonical(q).w() >= 0.0);
}

TEST_CASE("interpolate poses") {
  const Pose3 a(Quat::Identity(), Vec3::Zero());
  const Pose3 b(yaw_quat(1.0), Vec3(2.0, 0.0, 0.0));
  const Pose3 mid = interpolate(a, b, 0.5);
  CHECK(std::abs(so3_log(mid.q).z() - 0.5) < 1e-12);
  CHECK((mid.t - Vec3(1.0, 0.0, 0.0)).norm() < 1e-12);
}
