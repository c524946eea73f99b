#pragma once

#include "kcm/rational.hpp"

#include <cstdint>
#include <string>

namespace kcm {

/// Static parameters of the weakly asymmetric constrained exclusion process
/// on a ring of L sites.
///
/// The jump kernel is p(+1) = 1/2 + b/(2 n^gamma), p(-1) = 1/2 - b/(2 n^gamma).
/// The quantity b / n^gamma is called the skew below.
class ModelParams {
 public:
  /// Throws InvalidInput unless m >= 2, 0 < rho < 1, gamma > 0, n >= 1,
  /// |b| <= n^gamma, L a multiple of n and L >= 4(m+1).
  /// A ring size of 0 selects the default L = 8n.
  ModelParams(int m, Rational rho, double b, double gamma, int n, long ring_size = 0);

  int m() const { return m_; }
  const Rational& rho() const { return rho_; }
  double rho_value() const { return rho_value_; }
  double b() const { return b_; }
  double gamma() const { return gamma_; }
  int n() const { return n_; }
  long ring_size() const { return ring_size_; }

  /// b / n^gamma as a double.
  double skew() const { return skew_; }
  /// The same double, read exactly as a rational.
  Rational exact_skew() const { return rational_from_double(skew_); }

  double p_plus() const { return 0.5 + 0.5 * skew_; }
  double p_minus() const { return 0.5 - 0.5 * skew_; }
  Rational exact_p_plus() const;
  Rational exact_p_minus() const;

  /// n^2, the time acceleration.
  double time_scale() const { return static_cast<double>(n_) * n_; }

  ModelParams with_rho(Rational rho) const;
  ModelParams with_n(int n, long ring_size = 0) const;
  ModelParams with_b(double b) const;
  ModelParams with_gamma(double gamma) const;

  std::string describe() const;

 private:
  int m_;
  Rational rho_;
  double rho_value_;
  double b_;
  double gamma_;
  int n_;
  long ring_size_;
  double skew_;
};

/// The box {anchor+1, ..., anchor+length} to the right of `anchor`
/// (sites reduced modulo the ring size by the consumer).
struct BoxSpec {
  long anchor = 0;
  long length = 1;

  long first() const { return anchor + 1; }
  long last() const { return anchor + length; }
};

}  // namespace kcm
