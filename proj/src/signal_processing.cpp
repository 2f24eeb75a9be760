#include "vims/signal_processing.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace vims {

SonarSample median_filter_sonar(const std::vector<SonarSample>& window) {
  if (window.empty()) throw std::invalid_argument("median_filter_sonar: empty window");
  std::vector<double> ranges;
  ranges.reserve(window.size());
  for (const auto& s : window) ranges.push_back(s.range);
  const std::size_t mid = ranges.size() / 2;
  std::nth_element(ranges.begin(), ranges.begin() + static_cast<long>(mid), ranges.end());
  SonarSample out = window[window.size() / 2];
  out.range = ranges[mid];
  return out;
}

SonarMedianFilter::SonarMedianFilter(int half_width) : half_width_(half_width) {
  if (half_width < 0) throw std::invalid_argument("half_width must be >= 0");
}

SonarSample SonarMedianFilter::filtered_at(std::size_t center) const {
  const std::size_t lo_room = center;
  const std::size_t hi_room = history_.size() - 1 - center;
  const std::size_t k =
      std::min({static_cast<std::size_t>(half_width_), lo_room, hi_room});
  std::vector<SonarSample> win(history_.begin() + static_cast<long>(center - k),
                               history_.begin() + static_cast<long>(center + k + 1));
  return median_filter_sonar(win);
}

std::optional<SonarSample> SonarMedianFilter::push(const SonarSample& s) {
  history_.push_back(s);
  if (history_.size() <= static_cast<std::size_t>(half_width_)) return std::nullopt;
  const std::size_t center = history_.size() - 1 - static_cast<std::size_t>(half_width_);
  const SonarSample out = filtered_at(center);
  next_out_ = center + 1;
  return out;
}

std::vector<SonarSample> SonarMedianFilter::flush() {
  std::vector<SonarSample> out;
  for (std::size_t c = next_out_; c < history_.size(); ++c) {
    out.push_back(filtered_at(c));
  }
  next_out_ = history_.size();
  return out;
}

FieldSeparator::FieldSeparator(double sample_rate, double drive_frequency) {
  if (sample_rate < 4.0 * drive_frequency) {
    throw std::invalid_argument("field separation requires sample_rate >= 4 * drive_frequency");
  }
  window_ = static_cast<int>(std::lround(sample_rate / drive_frequency));
  if (window_ < 2) window_ = 2;
}

std::optional<SeparatedMag> FieldSeparator::push(const MagSample& s) {
  buf_.push_back(s);
  if (buf_.size() > static_cast<std::size_t>(window_)) buf_.pop_front();
  if (buf_.size() < static_cast<std::size_t>(window_)) return std::nullopt;

  // Recompute the mean each time; keeps the integer-period cancellation
  // exact over long streams.
  Vec3 mean = Vec3::Zero();
  for (const auto& m : buf_) mean += m.field_body;
  mean /= static_cast<double>(window_);

  const std::size_t center = buf_.size() - 1 - static_cast<std::size_t>(window_ / 2);
  const MagSample& at_center = buf_[center];
  SeparatedMag out;
  out.geomagnetic = MagSample{at_center.t, mean};
  out.alternating = MagSample{at_center.t, at_center.field_body - mean};
  return out;
}

std::pair<std::vector<MagSample>, std::vector<MagSample>> separate_fields(
    const std::vector<MagSample>& samples, double drive_frequency) {
  if (samples.size() < 2) {
    throw std::invalid_argument("separate_fields: need at least two samples");
  }
  const double span = samples.back().t - samples.front().t;
  const double rate = static_cast<double>(samples.size() - 1) / span;
  FieldSeparator sep(rate, drive_frequency);
  if (samples.size() < static_cast<std::size_t>(sep.window_length())) {
    throw std::invalid_argument("separate_fields: fewer samples than one filter window");
  }
  std::vector<MagSample> geo, alt;
  for (const auto& s : samples) {
    if (auto out = sep.push(s)) {
      geo.push_back(out->geomagnetic);
      alt.push_back(out->alternating);
    }
  }
  return {geo, alt};
}

SignatureExtractor::SignatureExtractor(const Options& opts) : opts_(opts) {
  const double samples_per_period = opts.sample_rate / opts.drive_frequency;
  const int periods = std::max(1, static_cast<int>(std::lround(
                                      opts.collection_period * opts.drive_frequency)));
  window_samples_ = static_cast<int>(std::lround(periods * samples_per_period));
  stride_samples_ = std::max(1, static_cast<int>(std::lround(
                                    opts.output_interval * opts.sample_rate)));
}

void SignatureExtractor::push_orientation(double t, const Quat& q_wb) {
  orientation_.emplace_back(t, q_wb.normalized());
  orientation_latest_ = t;
  // Retain just enough history to cover the oldest buffered sample.
  const double keep_from = buf_.empty() ? t - 1.0 : buf_.front().alternating.t - 1.0;
  while (orientation_.size() > 2 && orientation_[1].first < keep_from) {
    orientation_.pop_front();
  }
}

Quat SignatureExtractor::orientation_at(double t) const {
  if (orientation_.empty()) {
    throw std::runtime_error("signature extraction: no orientation stream");
  }
  auto it = std::lower_bound(
      orientation_.begin(), orientation_.end(), t,
      [](const std::pair<double, Quat>& a, double val) { return a.first < val; });
  if (it == orientation_.begin()) {
    if (it->first - t > opts_.max_orientation_gap) {
      throw std::runtime_error("signature extraction: orientation starts too late");
    }
    return it->second;
  }
  if (it == orientation_.end()) {
    const auto& last = orientation_.back();
    if (t - last.first > opts_.max_orientation_gap) {
      throw std::runtime_error("signature extraction: orientation gap beyond limit");
    }
    return last.second;
  }
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  if (hi.first - lo.first > opts_.max_orientation_gap) {
    throw std::runtime_error("signature extraction: orientation gap inside window");
  }
  const double denom = std::max(hi.first - lo.first, 1e-12);
  const double alpha = (t - lo.first) / denom;
  return lo.second.slerp(alpha, hi.second);
}

std::optional<MagneticSignature> SignatureExtractor::try_emit() {
  if (buf_.size() < static_cast<std::size_t>(window_samples_)) return std::nullopt;
  const double t_end = buf_[static_cast<std::size_t>(window_samples_) - 1].alternating.t;
  if (orientation_latest_ < t_end) return std::nullopt;

  const double t0 = buf_.front().alternating.t;
  const double w = 2.0 * M_PI * opts_.drive_frequency;
  std::complex<double> acc[3] = {};
  Vec3 geo_mean = Vec3::Zero();
  for (int n = 0; n < window_samples_; ++n) {
    const SeparatedMag& s = buf_[static_cast<std::size_t>(n)];
    const Quat q = orientation_at(s.alternating.t);
    const Vec3 enu = q * s.alternating.field_body;
    const std::complex<double> ph = std::polar(1.0, -w * (s.alternating.t - t0));
    for (int a = 0; a < 3; ++a) acc[a] += enu[a] * ph;
    geo_mean += s.geomagnetic.field_body;
  }
  MagneticSignature sig;
  for (int a = 0; a < 3; ++a) {
    sig.alt_amplitude_enu[a] = 2.0 * std::abs(acc[a]) / static_cast<double>(window_samples_);
  }
  sig.geomagnetic_body = geo_mean / static_cast<double>(window_samples_);
  sig.t_center = 0.5 * (t0 + t_end);
  sig.window_span = static_cast<double>(window_samples_) / opts_.sample_rate;

  for (int i = 0; i < stride_samples_ && !buf_.empty(); ++i) buf_.pop_front();
  return sig;
}

std::optional<MagneticSignature> SignatureExtractor::push(const SeparatedMag& s) {
  buf_.push_back(s);
  return try_emit();
}

std::vector<MagneticSignature> extract_signatures(
    const std::vector<SeparatedMag>& stream,
    const std::vector<std::pair<double, Quat>>& orientation,
    const SignatureExtractor::Options& opts) {
  SignatureExtractor ex(opts);
  std::vector<MagneticSignature> out;
  std::size_t oi = 0;
  for (const auto& s : stream) {
    while (oi < orientation.size() && orientation[oi].first <= s.alternating.t) {
      ex.push_orientation(orientation[oi].first, orientation[oi].second);
      ++oi;
    }
    if (auto sig = ex.push(s)) out.push_back(*sig);
  }
  // Trailing orientation lets the last pending window complete.
  while (oi < orientation.size()) {
    ex.push_orientation(orientation[oi].first, orientation[oi].second);
    ++oi;
    if (auto sig = ex.try_emit()) out.push_back(*sig);
  }
  return out;
}

}  // namespace vims
