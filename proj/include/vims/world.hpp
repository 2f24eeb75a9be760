#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vims/geometry.hpp"

namespace vims {

// Horizontal coil generating the alternating field. Modeled as a single
// equivalent circular loop carrying turns * current_amplitude at the coil's
// mid-height; the winding height is ignored, which is second-order at
// vehicle distances of 2 m and beyond.
struct CoilSpec {
  Vec3 center{0.0, 0.0, 0.0};    // m, world frame
  Vec3 axis{0.0, 0.0, 1.0};      // unit
  double radius = 0.3;           // m
  int turns = 330;
  double current_amplitude = 2.0;  // A
  double drive_frequency = 50.0;   // Hz

  void validate(double mag_sample_rate) const {
    if (radius <= 0.0) throw std::invalid_argument("coil radius must be > 0");
    if (turns < 1) throw std::invalid_argument("coil turns must be >= 1");
    if (drive_frequency <= 0.0 || drive_frequency >= 0.5 * mag_sample_rate) {
      throw std::invalid_argument("drive frequency must be in (0, sample_rate/2)");
    }
  }
};

struct SeafloorModel {
  double plane_height = 0.0;     // z of the bottom, world frame, m
  double roughness_sigma = 0.0;  // per-landmark vertical jitter, m
};

// Synthetic floor feature, stand-in for a trackable corner.
struct Landmark {
  std::uint32_t id = 0;
  Vec3 position = Vec3::Zero();
  double saliency = 0.0;                     // [0, 1]
  std::array<std::uint64_t, 4> descriptor{};  // ground-truth 256-bit appearance
  double canonical_orientation = 0.0;        // rad
};

struct SensorNoiseSpec {
  double gyro_noise_density = 1.5e-4;   // rad/s/sqrt(Hz)
  double gyro_bias_walk = 1.0e-5;       // rad/s^2/sqrt(Hz)
  double accel_noise_density = 2.0e-3;  // m/s^2/sqrt(Hz)
  double accel_bias_walk = 5.0e-5;      // m/s^3/sqrt(Hz)
  double mag_noise_sigma = 0.02;        // uT, per axis
  double sonar_range_sigma = 0.02;      // m
  double sonar_multipath_prob = 0.05;   // [0, 0.5)
  double sonar_multipath_scale = 1.8;   // range multiplier on a multipath hit
  double pixel_noise_sigma = 1.5e-3;    // normalized image plane

  void validate() const {
    const double vals[] = {gyro_noise_density, gyro_bias_walk, accel_noise_density,
                           accel_bias_walk,    mag_noise_sigma, sonar_range_sigma,
                           sonar_multipath_prob, sonar_multipath_scale,
                           pixel_noise_sigma};
    for (double v : vals) {
      if (v < 0.0) throw std::invalid_argument("noise spec values must be >= 0");
    }
    if (sonar_multipath_prob >= 0.5) {
      throw std::invalid_argument("sonar_multipath_prob must be < 0.5");
    }
  }
};

// Amplitude phasor of the alternating field at p, in Tesla (world frame).
// The instantaneous field is this vector times sin(2*pi*f*t). Throws when p
// is within 1 cm of the wire.
Vec3 coil_field(const CoilSpec& coil, const Vec3& p);

}  // namespace vims
