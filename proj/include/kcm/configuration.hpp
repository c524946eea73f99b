#pragma once

#include "kcm/model.hpp"
#include "kcm/random.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kcm {

/// Occupation variables on a periodic ring. Sites are reduced modulo the
/// ring size on every access, so any integer is a valid site.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(long ring_size);
  /// Parses a string of '0'/'1' characters; site 0 is the first character.
  static Configuration from_string(std::string_view bits);

  long size() const { return static_cast<long>(occ_.size()); }
  long count() const { return count_; }

  long wrap(long site) const {
    const long r = site % size();
    return r < 0 ? r + size() : r;
  }

  int operator()(long site) const { return occ_[static_cast<std::size_t>(wrap(site))]; }
  int at_wrapped(long wrapped_site) const { return occ_[static_cast<std::size_t>(wrapped_site)]; }

  void set(long site, int value);
  /// set() for a site already reduced to [0, size()).
  void set_wrapped(long wrapped_site, int value) {
    auto& slot = occ_[static_cast<std::size_t>(wrapped_site)];
    const auto next = static_cast<std::uint8_t>(value != 0);
    count_ += static_cast<long>(next) - static_cast<long>(slot);
    slot = next;
  }

  /// Swaps the occupations of two sites in place.
  void swap_sites(long x, long y);

  std::span<const std::uint8_t> occupations() const { return occ_; }

  std::string to_string() const;

  bool operator==(const Configuration& other) const { return occ_ == other.occ_; }

 private:
  std::vector<std::uint8_t> occ_;
  long count_ = 0;
};

/// Independent Bernoulli(rho) occupations on the ring of `params`, drawn from
/// random stream (seed, stream_id).
Configuration sample_equilibrium(const ModelParams& params, std::uint64_t seed,
                                 std::uint64_t stream_id = 0);

/// Bernoulli(rho) sample of an explicit ring size (used by tests and tools).
Configuration sample_bernoulli(long ring_size, double rho, std::uint64_t seed,
                               std::uint64_t stream_id = 0);

/// Bernoulli(rho) sample drawing one uniform per site from `rng`.
Configuration sample_bernoulli(long ring_size, double rho, RandomStream& rng);

/// eta^{x,y}. Throws InvalidInput when x == y modulo the ring size.
Configuration exchange(const Configuration& cfg, long x, long y);

}  // namespace kcm
