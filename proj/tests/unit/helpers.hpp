#pragma once

#include "kcm/configuration.hpp"
#include "kcm/local_function.hpp"

#include <cstdint>

namespace kcm::testing {

// Window [x + first, x + last] of a ring configuration as a pattern whose
// origin is `first` (so f(pattern) is the value of tau_x f).
inline PatternView pattern_around(const Configuration& cfg, long x, int first, int last) {
  std::uint32_t bits = 0;
  for (int i = 0; i <= last - first; ++i) bits |= static_cast<std::uint32_t>(cfg(x + first + i)) << i;
  return PatternView{bits, first};
}

inline Configuration configuration_from_bits(std::uint64_t bits, long size) {
  Configuration cfg(size);
  for (long i = 0; i < size; ++i) cfg.set(i, static_cast<int>((bits >> i) & 1U));
  return cfg;
}

}  // namespace kcm::testing
