#include "kcm/model.hpp"

#include "kcm/errors.hpp"

#include <cmath>
#include <sstream>

namespace kcm {

ModelParams::ModelParams(int m, Rational rho, double b, double gamma, int n, long ring_size)
    : m_(m),
      rho_(std::move(rho)),
      rho_value_(to_double(rho_)),
      b_(b),
      gamma_(gamma),
      n_(n),
      ring_size_(ring_size == 0 ? 8L * n : ring_size),
      skew_(0.0) {
  if (m_ < 2) throw InvalidInput("constraint order m must be >= 2");
  if (rho_ <= 0 || rho_ >= 1) throw InvalidInput("density must lie strictly between 0 and 1");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw InvalidInput("gamma must be positive");
  if (!std::isfinite(b_)) throw InvalidInput("b must be finite");
  if (n_ < 1) throw InvalidInput("scaling parameter n must be >= 1");
  const double n_gamma = std::pow(static_cast<double>(n_), gamma_);
  if (std::abs(b_) > n_gamma) throw InvalidInput("|b| must not exceed n^gamma (p(+-1) in [0,1])");
  if (ring_size_ % n_ != 0) throw InvalidInput("ring size must be a multiple of n");
  if (ring_size_ < 4L * (m_ + 1)) throw InvalidInput("ring size must be >= 4(m+1)");
  skew_ = b_ / n_gamma;
}

Rational ModelParams::exact_p_plus() const { return Rational(1, 2) + exact_skew() / 2; }
Rational ModelParams::exact_p_minus() const { return Rational(1, 2) - exact_skew() / 2; }

ModelParams ModelParams::with_rho(Rational rho) const {
  return ModelParams(m_, std::move(rho), b_, gamma_, n_, ring_size_);
}

ModelParams ModelParams::with_n(int n, long ring_size) const {
  return ModelParams(m_, rho_, b_, gamma_, n, ring_size);
}

ModelParams ModelParams::with_b(double b) const { return ModelParams(m_, rho_, b, gamma_, n_, ring_size_); }

ModelParams ModelParams::with_gamma(double gamma) const {
  return ModelParams(m_, rho_, b_, gamma, n_, ring_size_);
}

std::string ModelParams::describe() const {
  std::ostringstream out;
  out << "m=" << m_ << " rho=" << to_string(rho_) << " b=" << b_ << " gamma=" << gamma_ << " n=" << n_
      << " L=" << ring_size_;
  return out.str();
}

}  // namespace kcm
