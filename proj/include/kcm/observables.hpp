#pragma once

#include "kcm/configuration.hpp"
#include "kcm/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace kcm {

enum class TestFunctionKind { gaussian, hermite, bump };

/// Smooth, rapidly decaying test function on the real line.
///   gaussian: exp(-r^2/2)
///   hermite:  He_k(r) exp(-r^2/2)   (probabilists' Hermite polynomial)
///   bump:     exp(-1/(1-r^2)) for |r| < 1, 0 otherwise
/// with r = (u - center) / width.
class TestFunction {
 public:
  static TestFunction gaussian(double center = 0.0, double width = 1.0);
  static TestFunction hermite(int order, double center = 0.0, double width = 1.0);
  static TestFunction bump(double center = 0.0, double width = 1.0);

  double operator()(double u) const;
  double derivative(double u) const;

  TestFunctionKind kind() const { return kind_; }
  double center() const { return center_; }
  double width() const { return width_; }
  int order() const { return order_; }
  std::string name() const;

  /// Outside [center - R, center + R] the function is below 1e-12 of its
  /// maximum and is treated as zero.
  double support_radius() const { return radius_; }

  /// L2 norms of H and H' by adaptive Gauss-Kronrod quadrature over the
  /// support window. The error estimate is returned through `error` if given.
  double l2_norm_sq(double* error = nullptr) const;
  double gradient_l2_norm_sq(double* error = nullptr) const;

 private:
  TestFunction(TestFunctionKind kind, int order, double center, double width);
  double shape(double r) const;
  double shape_derivative(double r) const;

  TestFunctionKind kind_;
  int order_;
  double center_;
  double width_;
  double radius_ = 0.0;
};

/// Probabilists' Hermite polynomial He_k(x).
double hermite_polynomial(int order, double x);

/// Position of ring site x in [-L/2, L/2).
inline long ring_position(long x, long ring_size) { return x < ring_size / 2 ? x : x - ring_size; }

/// w(x) = H((pos(x) - shift) / n) for every ring site, the lattice distance
/// pos(x) - shift being reduced to [-L/2, L/2).
std::vector<double> test_weights(const TestFunction& h, int n, long ring_size, double shift = 0.0);

/// n [H((x+1)/n) - H(x/n)] and n [grad(x) - grad(x-1)] at lattice position x.
double discrete_gradient(const TestFunction& h, int n, long x);
double discrete_laplacian(const TestFunction& h, int n, long x);

/// The discrete gradient/Laplacian evaluated at ring_position(x) for every site.
std::vector<double> gradient_weights(const TestFunction& h, int n, long ring_size);
std::vector<double> laplacian_weights(const TestFunction& h, int n, long ring_size);

/// ||V||_{2,n}^2 = n^{-1} sum_x V(x)^2.
double weights_norm_2n(std::span<const double> weights, int n);

/// n^{-1/2} sum_x w(x) (eta(x) - rho).
double field_from_weights(const Configuration& cfg, std::span<const double> weights, double rho, int n);

/// Y_t^n(H) = n^{-1/2} sum_x H((x - v_n t)/n)(eta(x) - rho) with
/// v_n = n^{2-gamma} F'(rho).
double fluctuation_field(const Configuration& cfg, const TestFunction& h, const ModelParams& params, double t);

/// Exact equilibrium variance of Y^n(H): chi(rho) n^{-1} sum_x H(x/n)^2.
double exact_field_variance(const TestFunction& h, const ModelParams& params);

enum class BlockSide { right, left };

/// Right: l^{-1} sum_{y=x+1}^{x+l} eta-bar(y). Left: l^{-1} sum_{y=x-l}^{x-1} eta-bar(y).
/// Throws InvalidInput unless 1 <= ell < L.
double block_average(const Configuration& cfg, long x, long ell, BlockSide side, double rho);

/// Y^n(iota_eps(u)) with iota_eps(u) = eps^{-1} 1_{(u, u+eps]}, where eps is
/// replaced by floor(eps n)/n so that the indicator covers exactly
/// floor(eps n) lattice sites. Site y contributes when pos(y)/n lies in the
/// window; u is a macroscopic position. Throws InvalidInput when eps n < 1.
double mollified_field(const Configuration& cfg, double eps, double u, int n, double rho);

}  // namespace kcm
