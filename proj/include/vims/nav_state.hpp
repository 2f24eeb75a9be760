#pragma once

#include "vims/geometry.hpp"

namespace vims {

// IMU state at an image capture: position, velocity, orientation in the
// local frame plus both biases. Error-state order everywhere is
// [dp, dtheta, dv, dba, dbg] with right multiplicative rotation updates.
struct NavState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quat q = Quat::Identity();
  Vec3 ba = Vec3::Zero();
  Vec3 bg = Vec3::Zero();

  Pose3 pose() const { return Pose3(q, p); }

  void retract(const Eigen::Matrix<double, 15, 1>& d) {
    p += d.segment<3>(0);
    q = (q * so3_exp(d.segment<3>(3))).normalized();
    v += d.segment<3>(6);
    ba += d.segment<3>(9);
    bg += d.segment<3>(12);
  }
};

}  // namespace vims
