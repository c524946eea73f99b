#pragma once

#include "kcm/rational.hpp"

#include <cmath>
#include <type_traits>
#include <utility>

namespace kcm {

/// Thermodynamic functions of the constrained exclusion process of order m
/// with asymmetry amplitude b:
///   D(rho) = m rho^{m-1}, chi(rho) = rho(1-rho), F(rho) = b D(rho) chi(rho).
/// Scalar is Rational for exact checks or double for the Monte Carlo layer.
template <class Scalar>
class ThermoFunctions {
 public:
  ThermoFunctions(int m, Scalar b) : m_(m), b_(std::move(b)) {}

  int m() const { return m_; }
  const Scalar& b() const { return b_; }

  Scalar diffusivity(const Scalar& rho) const { return Scalar(m_) * power(rho, m_ - 1); }
  Scalar compressibility(const Scalar& rho) const { return rho * (Scalar(1) - rho); }

  Scalar flux(const Scalar& rho) const { return b_ * Scalar(m_) * power(rho, m_) * (Scalar(1) - rho); }

  Scalar flux_prime(const Scalar& rho) const {
    return b_ * Scalar(m_) * power(rho, m_ - 1) * (Scalar(m_) - Scalar(m_ + 1) * rho);
  }

  Scalar flux_second(const Scalar& rho) const {
    return b_ * Scalar(m_) * Scalar(m_) * power(rho, m_ - 2) * (Scalar(m_ - 1) - Scalar(m_ + 1) * rho);
  }

  /// Frame velocity n^{2-gamma} F'(rho), in lattice units per unit macroscopic time.
  double frame_velocity(const Scalar& rho, int n, double gamma) const {
    return std::pow(static_cast<double>(n), 2.0 - gamma) * as_double(flux_prime(rho));
  }

  /// The density at which F' vanishes, m/(m+1).
  Scalar critical_density() const { return Scalar(m_) / Scalar(m_ + 1); }

 private:
  static Scalar power(const Scalar& x, int k) {
    Scalar out(1);
    for (int i = 0; i < k; ++i) out *= x;
    return out;
  }

  static double as_double(const Scalar& x) {
    if constexpr (std::is_same_v<Scalar, double>) {
      return x;
    } else {
      return to_double(x);
    }
  }

  int m_;
  Scalar b_;
};

using ExactThermo = ThermoFunctions<Rational>;
using Thermo = ThermoFunctions<double>;

}  // namespace kcm
