#pragma once

#include <concepts>

namespace kcm {

/// Anything callable as occ(site) -> 0/1.
template <class Occ>
concept Occupation = requires(const Occ& occ, long site) {
  { occ(site) } -> std::convertible_to<int>;
};

/// Kinetic constraint of bond {x, x+1}:
///   c^m_{x,x+1} = sum_{k=1}^{m} prod_{j=-(m-k), j not in {0,1}}^{k} eta(x+j).
/// Depends only on sites x-m+1 .. x+m other than x, x+1, so the bond is
/// symmetric. For m = 2 this is eta(x-1) + eta(x+2).
template <Occupation Occ>
int constraint(const Occ& eta, long x, int m) {
  int total = 0;
  for (int k = 1; k <= m; ++k) {
    int product = 1;
    for (int j = -(m - k); j <= k && product != 0; ++j) {
      if (j == 0 || j == 1) continue;
      product *= eta(x + j);
    }
    total += product;
  }
  return total;
}

/// Leftmost and rightmost relative offsets read by constraint(eta, x, m).
inline constexpr int constraint_reach_left(int m) { return m - 1; }
inline constexpr int constraint_reach_right(int m) { return m; }

/// Rate-weighted activity of the bond: c * |eta(x) - eta(x+1)|.
template <Occupation Occ>
int bond_activity(const Occ& eta, long x, int m) {
  if (eta(x) == eta(x + 1)) return 0;
  return constraint(eta, x, m);
}

}  // namespace kcm
