#ifndef SCENGEN_RNG_HPP
#define SCENGEN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace scengen {

// SplitMix64-based stream. std::mt19937 plus the standard distributions is
// implementation-defined for floating output, so all randomness in this
// project goes through this class: sequences are bit-identical across
// platforms, builds, and thread counts.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  // Independent stream keyed by (master, a, b), e.g. (run seed, particle
  // index, iteration). Streams with different keys never share state.
  static RngStream substream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = mix(master);
    s = mix(s ^ (a + 0x9E3779B97F4A7C15ULL));
    s = mix(s ^ (b + 0xBF58476D1CE4E5B9ULL));
    return RngStream(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; second value cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n). Modulo bias is < 2^-32 for any n that fits
  // our use (shuffles over at most a few million elements).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace scengen

#endif  // SCENGEN_RNG_HPP
