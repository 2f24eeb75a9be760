#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include "vims/geometry.hpp"
#include "vims/rng.hpp"

namespace vims {

using DescriptorBits = std::array<std::uint64_t, 4>;  // 256 bits

inline int hamming(const DescriptorBits& a, const DescriptorBits& b) {
  int d = 0;
  for (int i = 0; i < 4; ++i) d += std::popcount(a[i] ^ b[i]);
  return d;
}

inline constexpr int kPyramidLevels = 8;
inline constexpr double kScaleStep = 1.2;  // per pyramid level

struct BinaryDescriptor {
  DescriptorBits bits{};
  std::uint8_t scale_level = 0;
  double response = 0.0;
};

// Parametric corruption model standing in for pixel-level ORB/BRIEF
// extraction. A rotation-aware model ignores in-plane viewpoint rotation;
// a rotation-sensitive one degrades with it.
struct DescriptorModelSpec {
  bool rotation_aware = true;
  double base_flip_prob = 0.02;       // [0, 0.5]
  double rotation_flip_gain = 0.10;   // flip probability per radian
  double scale_flip_gain = 0.15;      // flip probability per octave of mismatch
};

struct Viewpoint {
  double rotation = 0.0;     // in-plane viewpoint rotation, rad
  double scale_ratio = 1.0;  // apparent/reference scale
};

double descriptor_flip_probability(const Viewpoint& view, const DescriptorModelSpec& spec);

// Draw an observed descriptor: each bit of the ground-truth pattern flips
// independently with the viewpoint-dependent probability. Exactly 256
// uniform draws are consumed regardless of parameters, which keeps paired
// ablation runs pairwise comparable.
BinaryDescriptor describe(const DescriptorBits& truth, const Viewpoint& view,
                          const DescriptorModelSpec& spec, Rng& rng);

// The pyramid level whose scale best matches a landmark seen at `distance`.
int best_pyramid_level(double distance, double reference_distance);
// Scale ratio left over when extracting at `level`.
double level_scale_ratio(double distance, double reference_distance, int level);

// A sliding-window 3D point with everything needed to describe it.
struct ReplicationInput {
  Vec3 point = Vec3::Zero();
  DescriptorBits truth{};
  double view_rotation = 0.0;
  double distance = 0.0;  // camera-to-point, m
  double response = 0.0;
};

struct ReplicatedDescriptor {
  std::uint32_t point_index = 0;
  BinaryDescriptor descriptor;
};

// Replicate retained points across scale levels: points whose response
// clears the floor get one descriptor per level with that level's scale
// corruption applied; the rest are discarded.
std::vector<ReplicatedDescriptor> replicate_across_scales(
    const std::vector<ReplicationInput>& points, int levels, double response_floor,
    double reference_distance, const DescriptorModelSpec& spec, Rng& rng);

}  // namespace vims
