#include "kcm/analysis.hpp"

#include "kcm/errors.hpp"
#include "kcm/kmc.hpp"
#include "kcm/random.hpp"
#include "kcm/thermo.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace kcm {

unsigned default_thread_count() { return std::max(1U, std::thread::hardware_concurrency()); }

SquaredExpectation squared_expectation(std::span<const double> values, std::span<const std::uint8_t> truncated) {
  if (values.size() != truncated.size()) throw InvalidInput("values and truncation flags differ in length");
  SquaredExpectation out;
  out.total = static_cast<long>(values.size());
  std::vector<double> squares;
  squares.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (truncated[i]) {
      ++out.excluded;
      continue;
    }
    squares.push_back(values[i] * values[i]);
  }
  out.report = summarize(squares);
  return out;
}

namespace {

void check_times(std::span<const double> times, bool allow_zero) {
  if (times.empty()) throw InvalidInput("at least one observation time is required");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (!allow_zero && times[i] == 0.0)) throw InvalidInput("observation times must be positive");
    if (i > 0 && times[i] <= times[i - 1]) throw InvalidInput("observation times must increase");
  }
}

void tag(EstimatorReport& report, const ModelParams& params) {
  report.parameters["n"] = params.n();
  report.parameters["m"] = params.m();
  report.parameters["rho"] = params.rho_value();
  report.parameters["b"] = params.b();
  report.parameters["gamma"] = params.gamma();
  report.parameters["L"] = static_cast<double>(params.ring_size());
}

double blocked_bound(const ModelParams& params) {
  const double rho = params.rho_value();
  return std::pow(1.0 - std::pow(rho, params.m()), static_cast<double>(params.ring_size() / params.m()));
}

}  // namespace

TermGridResult estimate_terms(const TermGridRequest& request) {
  if (request.n_traj < 16) throw InvalidInput("n_traj must be at least 16");
  if (request.terms.empty()) throw InvalidInput("no terms requested");
  check_times(request.times, false);
  const ModelParams& params = request.params;
  std::vector<std::vector<double>> weights;
  for (const TermSpec& term : request.terms) weights.push_back(default_term_weights(term, params, request.h));
  // Build once so invalid terms fail before any simulation.
  for (std::size_t i = 0; i < request.terms.size(); ++i) make_integrand(request.terms[i], params, weights[i]);

  // A leading checkpoint at 0 keeps the random stream aligned with run().
  std::vector<double> checkpoints{0.0};
  checkpoints.insert(checkpoints.end(), request.times.begin(), request.times.end());

  TermGridResult result;
  result.blocked_probability_bound = blocked_bound(params);
  result.trajectories = run_farm(static_cast<std::size_t>(request.n_traj), request.threads, [&](std::size_t k) {
    RandomStream rng(request.seed, k);
    const Configuration initial = sample_bernoulli(params.ring_size(), params.rho_value(), rng);
    KmcEngine engine(params, initial, rng);
    std::vector<std::unique_ptr<Integrand>> list;
    for (std::size_t i = 0; i < request.terms.size(); ++i) list.push_back(make_integrand(request.terms[i], params, weights[i]));
    IntegralRecorder recorder(std::move(list), checkpoints.size());
    const RunOutcome outcome = drive(engine, checkpoints, recorder);
    TrajectoryIntegrals out;
    out.truncated = outcome.truncated;
    out.events = outcome.events;
    out.values.assign(request.terms.size(), std::vector<double>(request.times.size()));
    for (std::size_t i = 0; i < request.terms.size(); ++i) {
      for (std::size_t j = 0; j < request.times.size(); ++j) out.values[i][j] = recorder.integral(i, j + 1);
    }
    return out;
  });

  std::vector<std::uint8_t> flags;
  for (const auto& traj : result.trajectories) flags.push_back(traj.truncated ? 1 : 0);
  result.estimates.resize(request.terms.size());
  for (std::size_t i = 0; i < request.terms.size(); ++i) {
    for (std::size_t j = 0; j < request.times.size(); ++j) {
      std::vector<double> values;
      for (const auto& traj : result.trajectories) values.push_back(traj.values[i][j]);
      SquaredExpectation est = squared_expectation(values, flags);
      tag(est.report, params);
      est.report.parameters["t"] = request.times[j];
      const TermSpec& term = request.terms[i];
      if (term.kind == TermKind::bgp2_inner || term.kind == TermKind::energy_b || term.kind == TermKind::rest) {
        est.report.parameters["ell"] = static_cast<double>(term.block_length(params.n()));
        if (term.ell == 0) est.report.parameters["eps"] = term.eps;
      }
      result.estimates[i].push_back(std::move(est));
    }
  }
  return result;
}

CovarianceResult estimate_covariance(const CovarianceRequest& request) {
  if (request.n_traj < 16) throw InvalidInput("n_traj must be at least 16");
  if (request.functions.empty()) throw InvalidInput("no test functions");
  check_times(request.times, true);
  const ModelParams& params = request.params;
  std::vector<double> checkpoints{0.0};
  for (double t : request.times) {
    if (t > 0.0) checkpoints.push_back(t);
  }

  struct Sample {
    std::vector<std::vector<double>> fields;
    bool truncated = false;
  };
  const auto samples = run_farm(static_cast<std::size_t>(request.n_traj), request.threads, [&](std::size_t k) {
    RandomStream rng(request.seed, k);
    const Configuration initial = sample_bernoulli(params.ring_size(), params.rho_value(), rng);
    KmcEngine engine(params, initial, rng);
    FieldRecorder recorder(params, request.functions, checkpoints.size());
    const RunOutcome outcome = drive(engine, checkpoints, recorder);
    Sample s;
    s.truncated = outcome.truncated;
    s.fields.assign(request.functions.size(), std::vector<double>(checkpoints.size()));
    for (std::size_t f = 0; f < request.functions.size(); ++f) {
      for (std::size_t j = 0; j < checkpoints.size(); ++j) s.fields[f][j] = recorder.field(f, j);
    }
    return s;
  });

  CovarianceResult result;
  for (const Sample& s : samples) result.excluded += s.truncated ? 1 : 0;
  result.estimates.resize(request.functions.size());
  for (std::size_t f = 0; f < request.functions.size(); ++f) {
    for (double t : request.times) {
      const std::size_t j = t == 0.0 ? 0 : static_cast<std::size_t>(
                                               std::find(checkpoints.begin(), checkpoints.end(), t) - checkpoints.begin());
      std::vector<double> products;
      for (const Sample& s : samples) {
        if (!s.truncated) products.push_back(s.fields[f][j] * s.fields[f][0]);
      }
      EstimatorReport report = summarize(products);
      tag(report, params);
      report.parameters["t"] = t;
      result.estimates[f].push_back(std::move(report));
    }
  }
  return result;
}

namespace {

class CurrentCounter final : public TrajectoryObserver {
 public:
  void on_event(const Event& event, const Configuration&) override { net_ += event.direction; }
  long net() const { return net_; }

 private:
  long net_ = 0;
};

}  // namespace

EstimatorReport estimate_mean_current(const ModelParams& params, double t, int n_traj, std::uint64_t seed,
                                      unsigned threads) {
  if (!(t > 0.0)) throw InvalidInput("t must be positive");
  if (n_traj < 2) throw InvalidInput("n_traj must be at least 2");
  const double n = params.n();
  const auto samples = run_farm(static_cast<std::size_t>(n_traj), threads, [&](std::size_t k) {
    RandomStream rng(seed, k);
    const Configuration initial = sample_bernoulli(params.ring_size(), params.rho_value(), rng);
    KmcEngine engine(params, initial, rng);
    CurrentCounter counter;
    const double checkpoints[2] = {0.0, t};
    drive(engine, checkpoints, counter);
    return static_cast<double>(counter.net()) / (static_cast<double>(params.ring_size()) * n * n * t);
  });
  EstimatorReport report = summarize(samples);
  tag(report, params);
  report.parameters["t"] = t;
  return report;
}

double exact_mean_current(const ModelParams& params) {
  const Thermo thermo(params.m(), params.b());
  const double rho = params.rho_value();
  return params.skew() * thermo.diffusivity(rho) * thermo.compressibility(rho);
}

ScalingFit fit_power_law(std::span<const double> ns, std::span<const double> values) {
  if (ns.size() != values.size() || ns.size() < 2) throw InvalidInput("a power-law fit needs at least two points");
  ScalingFit fit;
  const auto count = static_cast<double>(ns.size());
  double mx = 0.0;
  double my = 0.0;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0.0) || !(values[i] > 0.0)) throw InvalidInput("power-law fits need positive data");
    fit.points.emplace_back(ns[i], values[i]);
    xs.push_back(std::log(ns[i]));
    ys.push_back(std::log(values[i]));
    mx += xs.back();
    my += ys.back();
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InvalidInput("power-law fits need at least two distinct n");
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.prefactor = std::exp(intercept);
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - intercept - fit.exponent * xs[i];
    rss += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  if (xs.size() > 2) fit.exponent_std_error = std::sqrt(rss / (count - 2.0) / sxx);
  return fit;
}

double bgp2_rhs_bound(double t, double ell, double n, double k) { return k * t * (ell / n + t * n / (ell * ell)); }

double optimal_block_length(double t, double n) { return std::cbrt(2.0 * t * n * n); }

double fit_bound_constant(std::span<const double> values, std::span<const double> bounds) {
  if (values.size() != bounds.size() || values.empty()) throw InvalidInput("values and bounds differ in length");
  double k = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(bounds[i] > 0.0)) throw InvalidInput("bounds must be positive");
    k = std::max(k, values[i] / bounds[i]);
  }
  return k;
}

bool nonincreasing_within(std::span<const double> estimates, std::span<const double> std_errors, double sigmas) {
  if (estimates.size() != std_errors.size()) throw InvalidInput("estimates and errors differ in length");
  for (std::size_t k = 0; k + 1 < estimates.size(); ++k) {
    const double slack = sigmas * std::hypot(std_errors[k], std_errors[k + 1]);
    if (estimates[k + 1] > estimates[k] + slack) return false;
  }
  return true;
}

double ou_covariance_oracle(const TestFunction& h, const TestFunction& g, double t, double rho, int m) {
  using boost::math::quadrature::gauss_kronrod;
  if (t < 0.0) throw InvalidInput("t must be nonnegative");
  const Thermo thermo(m, 0.0);
  const double chi = thermo.compressibility(rho);
  const double s = thermo.diffusivity(rho) * t;
  const double h_lo = h.center() - h.support_radius();
  const double h_hi = h.center() + h.support_radius();
  const double g_lo = g.center() - g.support_radius();
  const double g_hi = g.center() + g.support_radius();
  double worst = 0.0;

  const auto smoothed = [&](double u) {
    if (s == 0.0) return g(u);
    const double reach = 12.0 * std::sqrt(s);
    const double lo = std::max(g_lo, u - reach);
    const double hi = std::min(g_hi, u + reach);
    if (lo >= hi) return 0.0;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * s);
    const auto integrand = [&](double v) { return norm * std::exp(-(u - v) * (u - v) / (2.0 * s)) * g(v); };
    double error = 0.0;
    const double value = gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 15, 1e-12, &error);
    worst = std::max(worst, error);
    return value;
  };
  double error = 0.0;
  const double inner = gauss_kronrod<double, 61>::integrate([&](double u) { return h(u) * smoothed(u); }, h_lo, h_hi,
                                                            15, 1e-11, &error);
  const double scale = std::max(std::abs(inner), 1e-300);
  if (error > 1e-8 * scale || worst * (h_hi - h_lo) > 1e-8 * scale) {
    throw NumericalError("covariance quadrature did not converge");
  }
  return chi * inner;
}

double gaussian_ou_covariance(double sigma, double t, double rho, int m) {
  const Thermo thermo(m, 0.0);
  const double s = thermo.diffusivity(rho) * t;
  return thermo.compressibility(rho) * sigma * sigma * std::sqrt(2.0 * std::numbers::pi) / std::sqrt(2.0 * sigma * sigma + s);
}

NormalityTest jarque_bera(std::span<const double> samples) {
  if (samples.size() < 8) throw InvalidInput("normality test needs at least 8 samples");
  const double count = static_cast<double>(samples.size());
  const double mean = pairwise_sum(samples) / count;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= count;
  m3 /= count;
  m4 /= count;
  NormalityTest out;
  if (m2 == 0.0) throw InvalidInput("normality test needs nonconstant samples");
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  out.statistic = count / 6.0 * (out.skewness * out.skewness + out.excess_kurtosis * out.excess_kurtosis / 4.0);
  out.p_value = std::exp(-out.statistic / 2.0);
  return out;
}

EquilibriumFieldReport equilibrium_field_law(const ModelParams& params, const TestFunction& h, int samples,
                                             std::uint64_t seed, unsigned threads) {
  if (samples < 16) throw InvalidInput("at least 16 samples are required");
  const auto weights = test_weights(h, params.n(), params.ring_size());
  const auto fields = run_farm(static_cast<std::size_t>(samples), threads, [&](std::size_t k) {
    RandomStream rng(seed, k);
    const Configuration cfg = sample_bernoulli(params.ring_size(), params.rho_value(), rng);
    return field_from_weights(cfg, weights, params.rho_value(), params.n());
  });
  std::vector<double> squares(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) squares[i] = fields[i] * fields[i];
  EquilibriumFieldReport out;
  out.function = h.name();
  out.variance = summarize(squares);
  tag(out.variance, params);
  out.exact_variance = exact_field_variance(h, params);
  out.normality = jarque_bera(fields);
  return out;
}

CrossoverReport crossover_report(const CrossoverRequest& request) {
  CrossoverReport report;
  const TestFunction h = TestFunction::gaussian();
  for (double gamma : request.gammas) {
    CrossoverEntry entry;
    entry.gamma = gamma;
    entry.predicted_exponent = 1.0 - 2.0 * gamma;
    std::vector<double> ns;
    std::vector<double> values;
    for (int n : request.ns) {
      TermGridRequest grid{ModelParams(request.m, request.rho, request.b, gamma, n)};
      grid.terms = {TermSpec{TermKind::rest, 1, 2, request.eps}};
      grid.h = h;
      grid.times = {request.t};
      grid.n_traj = request.n_traj;
      grid.seed = request.seed;
      grid.threads = request.threads;
      const TermGridResult result = estimate_terms(grid);
      entry.rest_term.push_back(result.estimates[0][0]);
      ns.push_back(n);
      values.push_back(result.estimates[0][0].report.estimate);
    }
    entry.fit = fit_power_law(ns, values);
    report.entries.push_back(std::move(entry));
  }
  if (request.covariance_n > 0) {
    const TestFunction g = TestFunction::gaussian(0.0, request.covariance_width);
    for (const auto& [b, gamma] : {std::pair{0.0, 1.0}, std::pair{request.b, 1.0}}) {
      CovarianceRequest cov{ModelParams(request.m, request.rho, b, gamma, request.covariance_n)};
      cov.functions = {g};
      cov.times = request.covariance_times;
      cov.n_traj = request.covariance_traj;
      cov.seed = request.seed;
      cov.threads = request.threads;
      const CovarianceResult result = estimate_covariance(cov);
      for (std::size_t j = 0; j < cov.times.size(); ++j) {
        CovarianceComparison c;
        c.b = b;
        c.gamma = gamma;
        c.t = cov.times[j];
        c.estimate = result.estimates[0][j];
        c.oracle = ou_covariance_oracle(g, g, c.t, to_double(request.rho), request.m);
        report.covariance.push_back(std::move(c));
      }
    }
  }
  return report;
}

}  // namespace kcm
