#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cassert>
#include <cmath>
#include <cstdint>

namespace vims {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;
using Quat = Eigen::Quaterniond;

// Below this angle the sinc-style terms in exp/log switch to their Taylor
// expansions.
inline constexpr double kSmallAngle = 1e-6;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Rotation-vector exponential map, Hamilton convention.
inline Quat so3_exp(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  double w, s;
  if (theta < kSmallAngle) {
    // sin(t/2)/t and cos(t/2) expanded around zero
    w = 1.0 - theta2 / 8.0;
    s = 0.5 - theta2 / 48.0;
  } else {
    w = std::cos(0.5 * theta);
    s = std::sin(0.5 * theta) / theta;
  }
  Quat q(w, s * omega.x(), s * omega.y(), s * omega.z());
  q.normalize();
  return q;
}

// Inverse of so3_exp on the ball ||omega|| < pi. The pi-rotation branch picks
// the axis with non-negative leading component.
inline Vec3 so3_log(const Quat& q_in) {
  Quat q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v(q.x(), q.y(), q.z());
  const double vn = v.norm();
  if (vn < kSmallAngle) {
    // theta/sin(theta/2) ~ 2 + vn^2/3 for small angles (vn ~ theta/2)
    return v * (2.0 + vn * vn * 2.0 / 3.0);
  }
  const double theta = 2.0 * std::atan2(vn, q.w());
  return v * (theta / vn);
}

// Right Jacobian of SO(3): Exp(phi + d) ~ Exp(phi) * Exp(Jr(phi) d).
inline Mat3 so3_right_jacobian(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 W = skew(phi);
  if (t < kSmallAngle) {
    return Mat3::Identity() - 0.5 * W + (1.0 / 6.0) * W * W;
  }
  const double a = (1.0 - std::cos(t)) / t2;
  const double b = (t - std::sin(t)) / (t2 * t);
  return Mat3::Identity() - a * W + b * W * W;
}

inline Mat3 so3_right_jacobian_inv(const Vec3& phi) {
  const double t2 = phi.squaredNorm();
  const double t = std::sqrt(t2);
  const Mat3 W = skew(phi);
  if (t < kSmallAngle) {
    return Mat3::Identity() + 0.5 * W + (1.0 / 12.0) * W * W;
  }
  const double c = 1.0 / t2 - (1.0 + std::cos(t)) / (2.0 * t * std::sin(t));
  return Mat3::Identity() + 0.5 * W + c * W * W;
}

// Canonical representative of the double cover: w >= 0.
inline Quat canonical(const Quat& q) {
  Quat r = q;
  if (r.w() < 0.0) r.coeffs() = -r.coeffs();
  return r;
}

// Geodesic rotation angle in [0, pi].
inline double rotation_angle(const Quat& q) {
  const Quat c = canonical(q.normalized());
  const double vn = Vec3(c.x(), c.y(), c.z()).norm();
  return 2.0 * std::atan2(vn, c.w());
}

inline double rotation_angle_between(const Quat& a, const Quat& b) {
  return rotation_angle(a.conjugate() * b);
}

// Rigid transform, rotation stored as a unit Hamilton quaternion. Acting on a
// point means R*p + t.
struct Pose3 {
  Quat q = Quat::Identity();
  Vec3 t = Vec3::Zero();

  Pose3() = default;
  Pose3(const Quat& q_in, const Vec3& t_in) : q(q_in.normalized()), t(t_in) {}

  static Pose3 identity() { return Pose3(); }

  Mat3 rotation() const { return q.toRotationMatrix(); }

  Pose3 operator*(const Pose3& other) const {
    return Pose3(q * other.q, q * other.t + t);
  }

  Vec3 operator*(const Vec3& p) const { return q * p + t; }

  Pose3 inverse() const {
    const Quat qi = q.conjugate();
    return Pose3(qi, -(qi * t));
  }
};

inline Vec3 transform_point(const Pose3& pose, const Vec3& p) { return pose * p; }

inline Pose3 interpolate(const Pose3& a, const Pose3& b, double alpha) {
  return Pose3(a.q.slerp(alpha, b.q), (1.0 - alpha) * a.t + alpha * b.t);
}

// Yaw-only rotation about world z.
inline Quat yaw_quat(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

// Reference frames. Tags are carried by FramedPose in debug builds only; the
// plain Pose3 value type stays tag-free.
enum class Frame : std::uint8_t { World, Body, Camera, Sonar, Local, Any };

inline const char* frame_name(Frame f) {
  switch (f) {
    case Frame::World: return "world";
    case Frame::Body: return "body";
    case Frame::Camera: return "camera";
    case Frame::Sonar: return "sonar";
    case Frame::Local: return "local";
    case Frame::Any: return "any";
  }
  return "?";
}

// Pose annotated with (to <- from) frames; composition asserts chaining.
// Checks compile out with NDEBUG.
struct FramedPose {
  Pose3 pose;
#ifndef NDEBUG
  Frame to = Frame::Any;
  Frame from = Frame::Any;
#endif

  FramedPose() = default;
  FramedPose(const Pose3& p, [[maybe_unused]] Frame to_frame,
             [[maybe_unused]] Frame from_frame)
      : pose(p)
#ifndef NDEBUG
        ,
        to(to_frame),
        from(from_frame)
#endif
  {
  }

  FramedPose operator*(const FramedPose& rhs) const {
#ifndef NDEBUG
    assert((from == rhs.to || from == Frame::Any || rhs.to == Frame::Any) &&
           "frame chain mismatch");
    FramedPose out(pose * rhs.pose, to, rhs.from);
#else
    FramedPose out;
    out.pose = pose * rhs.pose;
#endif
    return out;
  }

  FramedPose inverse() const {
#ifndef NDEBUG
    return FramedPose(pose.inverse(), from, to);
#else
    FramedPose out;
    out.pose = pose.inverse();
    return out;
#endif
  }
};

struct WorldConstants {
  Vec3 gravity{0.0, 0.0, -9.80665};         // m/s^2, world frame (ENU, z up)
  Vec3 geomagnetic_world_ut{0.0, 30.0, -40.0};  // microtesla, ENU
};

}  // namespace vims
