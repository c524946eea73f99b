#pragma once

#include "kcm/estimator.hpp"
#include "kcm/integrands.hpp"
#include "kcm/model.hpp"
#include "kcm/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace kcm {

/// std::thread::hardware_concurrency(), at least 1.
unsigned default_thread_count();

/// Evaluates fn(0), ..., fn(count - 1) on up to `threads` workers. Result i
/// always comes from fn(i), so the output does not depend on scheduling.
/// The first exception thrown by any task is rethrown after all workers stop.
template <class Fn>
auto run_farm(std::size_t count, unsigned threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{0}))> {
  using Result = decltype(fn(std::size_t{0}));
  std::vector<Result> out(count);
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Mean of squares over the trajectories that were not blocked.
struct SquaredExpectation {
  EstimatorReport report;
  long excluded = 0;
  long total = 0;
};

/// Estimates E[X^2] from per-trajectory values; entries with truncated[i]
/// set are excluded and counted.
SquaredExpectation squared_expectation(std::span<const double> values, std::span<const std::uint8_t> truncated);

/// Several time-integral terms, estimated along the same trajectories.
struct TermGridRequest {
  ModelParams params;
  std::vector<TermSpec> terms{};
  TestFunction h = TestFunction::gaussian();
  /// Increasing observation times; every term is integrated up to each.
  std::vector<double> times{};
  int n_traj = 256;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct TrajectoryIntegrals {
  /// values[term][time]
  std::vector<std::vector<double>> values;
  bool truncated = false;
  std::uint64_t events = 0;
};

struct TermGridResult {
  /// estimates[term][time]
  std::vector<std::vector<SquaredExpectation>> estimates;
  std::vector<TrajectoryIntegrals> trajectories;
  /// Union bound on the probability that the initial ring has no mobile cluster.
  double blocked_probability_bound = 0.0;
};

/// Trajectory k starts from nu_rho drawn with stream (seed, k) and continues
/// with the same stream, exactly as run(params, ..., seed, k).
/// Throws InvalidInput unless n_traj >= 16 and times are positive and increasing.
TermGridResult estimate_terms(const TermGridRequest& request);

/// E[Y_t(H) Y_0(H)] for several test functions.
struct CovarianceRequest {
  ModelParams params;
  std::vector<TestFunction> functions{};
  std::vector<double> times{};
  int n_traj = 512;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct CovarianceResult {
  /// estimates[function][time]
  std::vector<std::vector<EstimatorReport>> estimates;
  long excluded = 0;
};

CovarianceResult estimate_covariance(const CovarianceRequest& request);

/// Net number of particle jumps to the right per bond per unit of
/// microscopic time, one sample per trajectory over [0, t].
EstimatorReport estimate_mean_current(const ModelParams& params, double t, int n_traj, std::uint64_t seed,
                                      unsigned threads);

/// b n^{-gamma} D(rho) chi(rho).
double exact_mean_current(const ModelParams& params);

/// Ordinary least squares of log(value) on log(n).
struct ScalingFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  double exponent_std_error = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Throws InvalidInput with fewer than two points or a nonpositive coordinate.
ScalingFit fit_power_law(std::span<const double> ns, std::span<const double> values);

/// K t (ell/n + t n / ell^2).
double bgp2_rhs_bound(double t, double ell, double n, double k);

/// The ell minimizing bgp2_rhs_bound at fixed t and n: (2 t n^2)^{1/3}.
double optimal_block_length(double t, double n);

/// Smallest K with value_i <= K bound_i for every i.
double fit_bound_constant(std::span<const double> values, std::span<const double> bounds);

/// est[k+1] <= est[k] + sigmas * sqrt(se[k]^2 + se[k+1]^2) for every k.
bool nonincreasing_within(std::span<const double> estimates, std::span<const double> std_errors, double sigmas);

/// chi(rho) int int H(u) k_{D(rho) t}(u - v) G(v) du dv with k_s the centered
/// Gaussian density of variance s; chi(rho) <H, G> at t = 0. Nested adaptive
/// Gauss-Kronrod quadrature; throws NumericalError when the error estimate
/// exceeds 1e-8 relative.
double ou_covariance_oracle(const TestFunction& h, const TestFunction& g, double t, double rho, int m);

/// Closed form for H = G = exp(-u^2/(2 sigma^2)):
/// chi sigma^2 sqrt(2 pi) / sqrt(2 sigma^2 + D t).
double gaussian_ou_covariance(double sigma, double t, double rho, int m);

/// Jarque-Bera statistic and its asymptotic chi-square(2) p-value exp(-JB/2).
struct NormalityTest {
  double statistic = 0.0;
  double p_value = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

NormalityTest jarque_bera(std::span<const double> samples);

/// Variance of Y_0(H) over independent draws from nu_rho, with the exact
/// finite-n value and a normality test.
struct EquilibriumFieldReport {
  std::string function;
  EstimatorReport variance;
  double exact_variance = 0.0;
  NormalityTest normality;
};

EquilibriumFieldReport equilibrium_field_law(const ModelParams& params, const TestFunction& h, int samples,
                                             std::uint64_t seed, unsigned threads);

/// Covariance against the oracle and the scaling of the nonlinear term per gamma.
struct CrossoverRequest {
  int m = 2;
  Rational rho = Rational(2, 3);
  double b = 1.0;
  std::vector<double> gammas{0.5, 1.0};
  std::vector<int> ns{32, 64, 128, 256};
  double eps = 0.25;
  double t = 0.25;
  int n_traj = 256;
  /// Covariance check: n, times and test function width. Skipped when covariance_n is 0.
  int covariance_n = 0;
  std::vector<double> covariance_times{0.1, 0.5, 1.0};
  double covariance_width = 0.5;
  int covariance_traj = 512;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct CovarianceComparison {
  double b = 0.0;
  double gamma = 0.0;
  double t = 0.0;
  EstimatorReport estimate;
  double oracle = 0.0;
};

struct CrossoverEntry {
  double gamma = 0.0;
  std::vector<SquaredExpectation> rest_term;
  ScalingFit fit;
  /// Predicted exponent 1 - 2 gamma.
  double predicted_exponent = 0.0;
};

struct CrossoverReport {
  std::vector<CrossoverEntry> entries;
  std::vector<CovarianceComparison> covariance;
};

CrossoverReport crossover_report(const CrossoverRequest& request);

}  // namespace kcm
