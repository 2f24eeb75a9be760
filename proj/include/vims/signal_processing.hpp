#pragma once

#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vims/geometry.hpp"
#include "vims/scenario.hpp"

namespace vims {

// Per-axis amplitude of the alternating field over one collection window,
// expressed in ENU, plus the separated geomagnetic vector in the body frame.
struct MagneticSignature {
  double t_center = 0.0;
  Vec3 alt_amplitude_enu = Vec3::Zero();  // uT, componentwise >= 0
  Vec3 geomagnetic_body = Vec3::Zero();   // uT
  double window_span = 0.0;               // s
};

// Median over an odd-length window; the returned sample keeps the center
// timestamp. Throws on an empty window.
SonarSample median_filter_sonar(const std::vector<SonarSample>& window);

// Streaming median filter with symmetric window shrink at the stream edges.
class SonarMedianFilter {
 public:
  explicit SonarMedianFilter(int half_width = 2);

  // Outputs lag by half_width samples once the stream warms up.
  std::optional<SonarSample> push(const SonarSample& s);
  // Emit the tail (windows shrink toward the end).
  std::vector<SonarSample> flush();

 private:
  SonarSample filtered_at(std::size_t center) const;
  int half_width_;
  std::vector<SonarSample> history_;
  std::size_t next_out_ = 0;
};

struct SeparatedMag {
  MagSample geomagnetic;   // moving-average estimate, body frame
  MagSample alternating;   // raw minus geomagnetic at the window center
};

// Moving-average separation of the geomagnetic and alternating components.
// The window covers an integer number of drive periods so the sinusoid
// cancels exactly; outputs are center-timestamped to compensate the filter
// delay.
class FieldSeparator {
 public:
  FieldSeparator(double sample_rate, double drive_frequency);

  std::optional<SeparatedMag> push(const MagSample& s);
  int window_length() const { return window_; }

 private:
  int window_;
  std::deque<MagSample> buf_;
};

// Convenience batch form. Sample rate is inferred from the timestamps.
std::pair<std::vector<MagSample>, std::vector<MagSample>> separate_fields(
    const std::vector<MagSample>& samples, double drive_frequency);

// Single-bin discrete Fourier projection at the drive frequency over a
// sliding collection window. Body-frame samples are rotated into ENU with
// slerp-interpolated orientation before projection, which is what makes the
// signature orientation-invariant.
class SignatureExtractor {
 public:
  struct Options {
    double sample_rate = 1000.0;
    double drive_frequency = 50.0;
    double collection_period = 2.0;   // s
    double output_interval = 0.4;     // s
    double max_orientation_gap = 0.05;  // s
  };

  explicit SignatureExtractor(const Options& opts);

  void push_orientation(double t, const Quat& q_wb);
  // Feed one separated sample; returns a signature whenever a window
  // completes and orientation coverage has caught up.
  std::optional<MagneticSignature> push(const SeparatedMag& s);
  // Re-check a pending window (after orientation coverage advanced).
  std::optional<MagneticSignature> try_emit();

  const Options& options() const { return opts_; }

 private:
  Quat orientation_at(double t) const;

  Options opts_;
  int window_samples_;
  int stride_samples_;
  std::deque<SeparatedMag> buf_;
  std::deque<std::pair<double, Quat>> orientation_;
  double orientation_latest_ = -1e300;
};

// Batch signature extraction over explicit streams (test/debug entry point).
std::vector<MagneticSignature> extract_signatures(
    const std::vector<SeparatedMag>& stream,
    const std::vector<std::pair<double, Quat>>& orientation,
    const SignatureExtractor::Options& opts);

}  // namespace vims
