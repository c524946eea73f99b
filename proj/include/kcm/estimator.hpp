#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

namespace kcm {

/// Monte Carlo estimate of a quantity, with the standard error computed from
/// independent samples (one per trajectory).
struct EstimatorReport {
  double estimate = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
  /// Free-form parameter tuple (n, m, rho, b, gamma, ell, eps, t, ...).
  std::map<std::string, double> parameters;

  /// (estimate - reference) / std_error; infinite when std_error is 0 and the
  /// values differ, 0 when they agree.
  double z_score(double reference) const;
};

/// Mean and standard error of the mean, accumulated in a fixed order with
/// pairwise summation so results do not depend on how work was scheduled.
EstimatorReport summarize(std::span<const double> samples);

/// Pairwise (cascade) sum; deterministic for a given input order.
double pairwise_sum(std::span<const double> values);

}  // namespace kcm
