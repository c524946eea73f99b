#include "kcm/observables.hpp"

#include "kcm/errors.hpp"
#include "kcm/thermo.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace kcm {

namespace {

constexpr double kTruncation = 1e-12;

}  // namespace

double hermite_polynomial(int order, double x) {
  if (order == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < order; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

TestFunction::TestFunction(TestFunctionKind kind, int order, double center, double width)
    : kind_(kind), order_(order), center_(center), width_(width) {
  if (!(width > 0.0)) throw InvalidInput("test function width must be positive");
  if (order < 0) throw InvalidInput("Hermite order must be nonnegative");
  if (kind == TestFunctionKind::bump) {
    radius_ = width;
    return;
  }
  // Scan a fine grid of r for the peak, then walk in from far out until the
  // envelope exceeds the truncation level.
  double peak = 0.0;
  for (double r = 0.0; r <= 40.0; r += 1e-3) peak = std::max(peak, std::abs(shape(r)));
  double r = 40.0;
  while (r > 0.0 && std::abs(shape(r)) <= kTruncation * peak && std::abs(shape(-r)) <= kTruncation * peak) r -= 1e-3;
  radius_ = (r + 1e-3) * width;
}

TestFunction TestFunction::gaussian(double center, double width) {
  return TestFunction(TestFunctionKind::gaussian, 0, center, width);
}

TestFunction TestFunction::hermite(int order, double center, double width) {
  return TestFunction(TestFunctionKind::hermite, order, center, width);
}

TestFunction TestFunction::bump(double center, double width) {
  return TestFunction(TestFunctionKind::bump, 0, center, width);
}

std::string TestFunction::name() const {
  char buffer[96];
  switch (kind_) {
    case TestFunctionKind::gaussian:
      std::snprintf(buffer, sizeof(buffer), "gaussian(c=%g,w=%g)", center_, width_);
      break;
    case TestFunctionKind::hermite:
      std::snprintf(buffer, sizeof(buffer), "hermite%d(c=%g,w=%g)", order_, center_, width_);
      break;
    case TestFunctionKind::bump:
      std::snprintf(buffer, sizeof(buffer), "bump(c=%g,w=%g)", center_, width_);
      break;
  }
  return buffer;
}

double TestFunction::shape(double r) const {
  switch (kind_) {
    case TestFunctionKind::gaussian:
      return std::exp(-0.5 * r * r);
    case TestFunctionKind::hermite:
      return hermite_polynomial(order_, r) * std::exp(-0.5 * r * r);
    case TestFunctionKind::bump:
      return std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
  }
  return 0.0;
}

double TestFunction::shape_derivative(double r) const {
  switch (kind_) {
    case TestFunctionKind::gaussian:
      return -r * std::exp(-0.5 * r * r);
    case TestFunctionKind::hermite:
      // d/dr He_k(r) e^{-r^2/2} = -He_{k+1}(r) e^{-r^2/2}
      return -hermite_polynomial(order_ + 1, r) * std::exp(-0.5 * r * r);
    case TestFunctionKind::bump: {
      if (std::abs(r) >= 1.0) return 0.0;
      const double q = 1.0 - r * r;
      return std::exp(-1.0 / q) * (-2.0 * r / (q * q));
    }
  }
  return 0.0;
}

double TestFunction::operator()(double u) const {
  const double r = (u - center_) / width_;
  if (std::abs(u - center_) > radius_) return 0.0;
  return shape(r);
}

double TestFunction::derivative(double u) const {
  if (std::abs(u - center_) > radius_) return 0.0;
  return shape_derivative((u - center_) / width_) / width_;
}

double TestFunction::l2_norm_sq(double* error) const {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [this](double u) { return (*this)(u) * (*this)(u); };
  return gauss_kronrod<double, 61>::integrate(f, center_ - radius_, center_ + radius_, 15, 1e-13, error);
}

double TestFunction::gradient_l2_norm_sq(double* error) const {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [this](double u) { return derivative(u) * derivative(u); };
  return gauss_kronrod<double, 61>::integrate(f, center_ - radius_, center_ + radius_, 15, 1e-13, error);
}

std::vector<double> test_weights(const TestFunction& h, int n, long ring_size, double shift) {
  std::vector<double> w(static_cast<std::size_t>(ring_size));
  const double size = static_cast<double>(ring_size);
  for (long x = 0; x < ring_size; ++x) {
    double d = static_cast<double>(ring_position(x, ring_size)) - shift;
    d -= size * std::floor((d + 0.5 * size) / size);
    w[static_cast<std::size_t>(x)] = h(d / n);
  }
  return w;
}

double discrete_gradient(const TestFunction& h, int n, long x) {
  return n * (h(static_cast<double>(x + 1) / n) - h(static_cast<double>(x) / n));
}

double discrete_laplacian(const TestFunction& h, int n, long x) {
  return n * (discrete_gradient(h, n, x) - discrete_gradient(h, n, x - 1));
}

std::vector<double> gradient_weights(const TestFunction& h, int n, long ring_size) {
  std::vector<double> w(static_cast<std::size_t>(ring_size));
  for (long x = 0; x < ring_size; ++x) w[static_cast<std::size_t>(x)] = discrete_gradient(h, n, ring_position(x, ring_size));
  return w;
}

std::vector<double> laplacian_weights(const TestFunction& h, int n, long ring_size) {
  std::vector<double> w(static_cast<std::size_t>(ring_size));
  for (long x = 0; x < ring_size; ++x) w[static_cast<std::size_t>(x)] = discrete_laplacian(h, n, ring_position(x, ring_size));
  return w;
}

double weights_norm_2n(std::span<const double> weights, int n) {
  double total = 0.0;
  for (double v : weights) total += v * v;
  return total / n;
}

double field_from_weights(const Configuration& cfg, std::span<const double> weights, double rho, int n) {
  if (static_cast<long>(weights.size()) != cfg.size()) throw InvalidInput("weights do not match the ring size");
  double total = 0.0;
  for (long x = 0; x < cfg.size(); ++x) total += weights[static_cast<std::size_t>(x)] * (cfg.at_wrapped(x) - rho);
  return total / std::sqrt(static_cast<double>(n));
}

double fluctuation_field(const Configuration& cfg, const TestFunction& h, const ModelParams& params, double t) {
  const Thermo thermo(params.m(), params.b());
  const double shift = thermo.frame_velocity(params.rho_value(), params.n(), params.gamma()) * t;
  const auto w = test_weights(h, params.n(), cfg.size(), shift);
  return field_from_weights(cfg, w, params.rho_value(), params.n());
}

double exact_field_variance(const TestFunction& h, const ModelParams& params) {
  const auto w = test_weights(h, params.n(), params.ring_size());
  double total = 0.0;
  for (double v : w) total += v * v;
  const double rho = params.rho_value();
  return rho * (1.0 - rho) * total / params.n();
}

double block_average(const Configuration& cfg, long x, long ell, BlockSide side, double rho) {
  if (ell < 1 || ell >= cfg.size()) throw InvalidInput("block length must lie in [1, L - 1]");
  long count = 0;
  const long first = side == BlockSide::right ? x + 1 : x - ell;
  for (long y = first; y < first + ell; ++y) count += cfg(y);
  return (static_cast<double>(count) - static_cast<double>(ell) * rho) / static_cast<double>(ell);
}

double mollified_field(const Configuration& cfg, double eps, double u, int n, double rho) {
  const auto ell = static_cast<long>(std::floor(eps * n));
  if (ell < 1) throw InvalidInput("eps n must be at least 1");
  if (ell >= cfg.size()) throw InvalidInput("mollifier window must be shorter than the ring");
  // Positions y with u n < y <= u n + ell.
  const auto start = static_cast<long>(std::floor(u * n)) + 1;
  long count = 0;
  for (long y = start; y < start + ell; ++y) count += cfg(y);
  const double eps_eff = static_cast<double>(ell) / n;
  return (static_cast<double>(count) - static_cast<double>(ell) * rho) / eps_eff / std::sqrt(static_cast<double>(n));
}

}  // namespace kcm
