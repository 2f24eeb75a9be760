#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace vims {

// Deterministic RNG wrapper. Gaussian draws go through an explicit
// Box-Muller so sequences do not depend on the standard library's
// distribution internals. Streams forked by label are independent: toggling
// consumption on one stream never shifts another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : seed_base_(seed), engine_(mix(seed ^ 0x6a09e667f3bcc908ull)) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

  // Child stream derived from (base seed, label); independent of draws made
  // on this stream so far.
  Rng fork(std::string_view label) const {
    return Rng(mix(seed_base_ ^ hash_label(label)));
  }

  std::uint64_t base_seed() const { return seed_base_; }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {  // [0, 1)
    return (next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t uniform_index(std::uint64_t n) {  // [0, n)
    return n == 0 ? 0 : next_u64() % n;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_base_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace vims
