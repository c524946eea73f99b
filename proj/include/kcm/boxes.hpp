#pragma once

#include "kcm/configuration.hpp"
#include "kcm/model.hpp"
#include "kcm/rational.hpp"

namespace kcm {

/// True iff no bond of the ring can flip: c^m_{x,x+1}(eta) * |eta(x) - eta(x+1)| = 0
/// for every x. The full and the empty ring are both blocked.
bool is_blocked(const Configuration& cfg, int m);
inline bool is_blocked(const Configuration& cfg, const ModelParams& params) {
  return is_blocked(cfg, params.m());
}

/// True iff the box holds a mobile cluster: m particles inside the box with at
/// most one hole among them, i.e. either m consecutive occupied sites or m
/// particles among m+1 consecutive sites. For m = 2 this is the event
///   sum_{y=x+1}^{x+l-2} (eta(y)eta(y+1) + eta(y)eta(y+2)) + eta(x+l-1)eta(x+l) > 0.
/// Throws InvalidInput when box.length < m.
bool is_good_box(const Configuration& cfg, const BoxSpec& box, int m);
inline bool is_good_box(const Configuration& cfg, const BoxSpec& box, const ModelParams& params) {
  return is_good_box(cfg, box, params.m());
}

/// (1 - rho^m)^floor(ell/m). Requires ell >= m.
Rational bad_box_bound(const Rational& rho, long ell, int m);

/// Exact Bernoulli(rho) probability that a box of ell sites is bad, by a
/// transfer matrix over the last m occupations. Valid for rho in [0, 1].
/// Throws SizeLimit when ell > kMaxBadBoxLength or m > kMaxBadBoxOrder.
Rational exact_bad_box_probability(const Rational& rho, long ell, int m);

inline constexpr long kMaxBadBoxLength = 4096;
inline constexpr int kMaxBadBoxOrder = 12;

/// Whether a pattern of `length` bits (bit i = site i of a box) is a good box.
bool is_good_pattern(unsigned long long bits, int length, int m);

}  // namespace kcm
