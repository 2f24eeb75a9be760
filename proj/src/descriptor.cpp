#include "vims/descriptor.hpp"

#include <algorithm>
#include <cmath>

namespace vims {

double descriptor_flip_probability(const Viewpoint& view, const DescriptorModelSpec& spec) {
  double p = spec.base_flip_prob;
  if (!spec.rotation_aware) {
    p += spec.rotation_flip_gain * std::abs(wrap_angle(view.rotation));
  }
  p += spec.scale_flip_gain * std::abs(std::log2(std::max(view.scale_ratio, 1e-6)));
  return std::clamp(p, 0.0, 0.5);
}

BinaryDescriptor describe(const DescriptorBits& truth, const Viewpoint& view,
                          const DescriptorModelSpec& spec, Rng& rng) {
  const double p = descriptor_flip_probability(view, spec);
  BinaryDescriptor out;
  out.bits = truth;
  for (int w = 0; w < 4; ++w) {
    for (int b = 0; b < 64; ++b) {
      if (rng.uniform() < p) out.bits[w] ^= (1ull << b);
    }
  }
  return out;
}

int best_pyramid_level(double distance, double reference_distance) {
  const double octaves = std::log2(std::max(distance / reference_distance, 1e-6));
  const int level = static_cast<int>(std::lround(octaves / std::log2(kScaleStep)));
  return std::clamp(level, 0, kPyramidLevels - 1);
}

double level_scale_ratio(double distance, double reference_distance, int level) {
  return (distance / reference_distance) / std::pow(kScaleStep, level);
}

std::vector<ReplicatedDescriptor> replicate_across_scales(
    const std::vector<ReplicationInput>& points, int levels, double response_floor,
    double reference_distance, const DescriptorModelSpec& spec, Rng& rng) {
  if (levels < 1 || levels > kPyramidLevels) {
    throw std::invalid_argument("replicate_across_scales: levels out of range");
  }
  std::vector<ReplicatedDescriptor> out;
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const ReplicationInput& pt = points[i];
    if (!(pt.response > response_floor)) continue;
    for (int level = 0; level < levels; ++level) {
      Viewpoint view;
      view.rotation = pt.view_rotation;
      view.scale_ratio = level_scale_ratio(pt.distance, reference_distance, level);
      ReplicatedDescriptor rd;
      rd.point_index = i;
      rd.descriptor = describe(pt.truth, view, spec, rng);
      rd.descriptor.scale_level = static_cast<std::uint8_t>(level);
      rd.descriptor.response = pt.response;
      out.push_back(rd);
    }
  }
  return out;
}

}  // namespace vims
