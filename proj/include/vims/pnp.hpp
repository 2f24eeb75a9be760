#pragma once

#include <optional>
#include <vector>

#include "vims/geometry.hpp"
#include "vims/rng.hpp"

namespace vims {

struct Correspondence {
  Vec3 point;  // reference frame (the frame the pose is estimated against)
  Vec2 uv;     // normalized image coordinates in the camera
};

// Minimal three-point pose solutions (camera <- reference). Up to four.
std::vector<Pose3> p3p_solve(const std::array<Vec3, 3>& points,
                             const std::array<Vec3, 3>& bearings);

struct PnpOptions {
  int iterations = 200;
  double inlier_threshold = 0.01;  // normalized image units
  int min_inliers = 12;
  std::uint64_t seed = 1;
};

struct PnpResult {
  Pose3 pose;  // camera <- reference frame
  std::vector<char> inlier_mask;
  int inlier_count = 0;
  double mean_error = 0.0;
};

// P3P hypotheses (plus one disambiguation point) scored by inlier count,
// refined by Gauss-Newton on the inliers. Deterministic under the seed.
// Returns nothing when fewer than four correspondences are given or no
// hypothesis reaches min_inliers.
std::optional<PnpResult> pnp_ransac(const std::vector<Correspondence>& matches,
                                    const PnpOptions& opts);

}  // namespace vims
