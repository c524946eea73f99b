#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace kcm {

/// Counter-based random stream. Output i of stream (seed, id) is a fixed
/// mixing function of (key(seed, id), i), so streams are independent of
/// scheduling and any stream can be reproduced in isolation.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(mix(mix(seed ^ 0x243f6a8885a308d3ULL) + stream_id * kGolden)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (counter_++) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_left() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

  /// Exponential with unit rate.
  double exponential() { return -std::log(uniform_open_left()); }

  /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) {
    __uint128_t product = static_cast<__uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<__uint128_t>((*this)()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  /// Standard normal (Box-Muller; one draw per call).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open_left()));
    return r * std::cos(2.0 * 3.14159265358979323846 * uniform());
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace kcm
