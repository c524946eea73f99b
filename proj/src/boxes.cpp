#include "kcm/boxes.hpp"

#include "kcm/constraint.hpp"
#include "kcm/errors.hpp"

#include <bit>
#include <vector>

namespace kcm {

bool is_blocked(const Configuration& cfg, int m) {
  for (long x = 0; x < cfg.size(); ++x) {
    if (bond_activity(cfg, x, m) > 0) return false;
  }
  return true;
}

namespace {

// Scans sites first..first+length-1 read through `occ` for a mobile cluster.
template <class Occ>
bool scan_for_cluster(const Occ& occ, long first, long length, int m) {
  for (long start = 0; start < length; ++start) {
    if (occ(first + start) == 0) continue;
    if (start + m <= length) {
      int run = 0;
      while (run < m && occ(first + start + run) == 1) ++run;
      if (run == m) return true;
    }
    if (start + m + 1 <= length) {
      int particles = 0;
      for (int j = 0; j <= m; ++j) particles += occ(first + start + j);
      if (particles >= m) return true;
    }
  }
  return false;
}

}  // namespace

bool is_good_box(const Configuration& cfg, const BoxSpec& box, int m) {
  if (box.length < m) throw InvalidInput("box length must be at least m");
  if (box.length > cfg.size() - 1) throw InvalidInput("box must be shorter than the ring");
  return scan_for_cluster(cfg, box.first(), box.length, m);
}

bool is_good_pattern(unsigned long long bits, int length, int m) {
  const auto occ = [bits](long site) { return static_cast<int>((bits >> site) & 1ULL); };
  return scan_for_cluster(occ, 0, length, m);
}

Rational bad_box_bound(const Rational& rho, long ell, int m) {
  if (m < 1 || ell < m) throw InvalidInput("bad_box_bound needs ell >= m >= 1");
  return pow(Rational(1) - pow(rho, static_cast<unsigned>(m)), static_cast<unsigned>(ell / m));
}

Rational exact_bad_box_probability(const Rational& rho, long ell, int m) {
  if (m < 1 || ell < m) throw InvalidInput("exact_bad_box_probability needs ell >= m >= 1");
  if (rho < 0 || rho > 1) throw InvalidInput("density must lie in [0, 1]");
  if (m > kMaxBadBoxOrder) throw SizeLimit("constraint order beyond transfer-matrix capacity");
  if (ell > kMaxBadBoxLength) throw SizeLimit("box length beyond transfer-matrix capacity");

  // State: the last m occupations (bit 0 = most recent). Sites before the box
  // start read as empty, which can never complete a cluster on their own.
  const std::size_t states = std::size_t{1} << m;
  const unsigned full_m = (1U << m) - 1U;
  const Rational q = Rational(1) - rho;
  std::vector<Rational> weight(states, Rational(0));
  std::vector<Rational> next(states, Rational(0));
  weight[0] = 1;
  for (long step = 0; step < ell; ++step) {
    for (auto& w : next) w = 0;
    for (std::size_t s = 0; s < states; ++s) {
      if (weight[s] == 0) continue;
      for (unsigned bit = 0; bit <= 1; ++bit) {
        const unsigned window = (static_cast<unsigned>(s) << 1U) | bit;  // last m+1 sites
        const unsigned last_m = window & full_m;
        const bool full_run = last_m == full_m;
        const bool dense = std::popcount(window) >= m;
        // A window that reaches before the box start has a padded zero in its
        // oldest slot, so `dense` there already implies `full_run`.
        if (full_run || dense) continue;
        next[last_m] += weight[s] * (bit == 1 ? rho : q);
      }
    }
    std::swap(weight, next);
  }
  Rational total(0);
  for (const auto& w : weight) total += w;
  return total;
}

}  // namespace kcm
