#include "kcm/configuration.hpp"

#include "kcm/errors.hpp"
#include "kcm/random.hpp"

#include <utility>

namespace kcm {

Configuration::Configuration(long ring_size) {
  if (ring_size < 1) throw InvalidInput("ring size must be positive");
  occ_.assign(static_cast<std::size_t>(ring_size), 0);
}

Configuration Configuration::from_string(std::string_view bits) {
  Configuration cfg(static_cast<long>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw InvalidInput("configuration strings use only '0' and '1'");
    cfg.set(static_cast<long>(i), bits[i] == '1' ? 1 : 0);
  }
  return cfg;
}

void Configuration::set(long site, int value) {
  auto& slot = occ_[static_cast<std::size_t>(wrap(site))];
  const auto next = static_cast<std::uint8_t>(value != 0);
  count_ += static_cast<long>(next) - static_cast<long>(slot);
  slot = next;
}

void Configuration::swap_sites(long x, long y) {
  std::swap(occ_[static_cast<std::size_t>(wrap(x))], occ_[static_cast<std::size_t>(wrap(y))]);
}

std::string Configuration::to_string() const {
  std::string out(occ_.size(), '0');
  for (std::size_t i = 0; i < occ_.size(); ++i) {
    if (occ_[i] != 0) out[i] = '1';
  }
  return out;
}

Configuration sample_bernoulli(long ring_size, double rho, RandomStream& rng) {
  Configuration cfg(ring_size);
  for (long x = 0; x < ring_size; ++x) cfg.set(x, rng.uniform() < rho ? 1 : 0);
  return cfg;
}

Configuration sample_bernoulli(long ring_size, double rho, std::uint64_t seed, std::uint64_t stream_id) {
  RandomStream rng(seed, stream_id);
  return sample_bernoulli(ring_size, rho, rng);
}

Configuration sample_equilibrium(const ModelParams& params, std::uint64_t seed, std::uint64_t stream_id) {
  return sample_bernoulli(params.ring_size(), params.rho_value(), seed, stream_id);
}

Configuration exchange(const Configuration& cfg, long x, long y) {
  if (cfg.wrap(x) == cfg.wrap(y)) throw InvalidInput("exchange needs two distinct sites");
  Configuration out = cfg;
  out.swap_sites(x, y);
  return out;
}

}  // namespace kcm
