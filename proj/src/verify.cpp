#include "kcm/verify.hpp"

#include "kcm/boxes.hpp"
#include "kcm/cluster_path.hpp"
#include "kcm/errors.hpp"
#include "kcm/local_calculus.hpp"
#include "kcm/polynomial.hpp"
#include "kcm/random.hpp"
#include "kcm/thermo.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <sstream>

namespace kcm {

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "unknown";
}

namespace {

const std::vector<Rational>& densities() {
  static const std::vector<Rational> values = {Rational(1, 5), Rational(1, 3), Rational(1, 2),
                                               Rational(2, 3), Rational(4, 5), Rational(3, 7)};
  return values;
}

// Runs body(detail) and times it. body returns pass/fail; SizeLimit becomes skipped.
CheckResult timed(const std::string& name, const std::function<bool(std::string&)>& body) {
  CheckResult result;
  result.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    result.status = body(result.detail) ? CheckStatus::pass : CheckStatus::fail;
  } catch (const SizeLimit& e) {
    result.status = CheckStatus::skipped;
    result.detail = e.what();
  } catch (const Error& e) {
    result.status = CheckStatus::fail;
    result.detail = e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

MultilinearPolynomial centered_sum(std::initializer_list<std::pair<Monomial, Rational>> terms) {
  MultilinearPolynomial p;
  for (const auto& [sites, coeff] : terms) p.add_term(sites, coeff);
  return p;
}

// P_1, P_2, P_3 of the m = 2 antisymmetric current, written out.
MultilinearPolynomial closed_p1(const Rational& rho, const Rational& b) {
  const Rational a = -b * (2 * rho * rho - rho);
  const Rational c = -b * (rho * rho - rho);
  return centered_sum({{{0}, a}, {{1}, a}, {{-1}, c}, {{2}, c}});
}

MultilinearPolynomial closed_p2(const Rational& rho, const Rational& b) {
  const Rational mixed = -b * (rho - Rational(1, 2));
  return centered_sum({{{0, 1}, -b * 2 * rho}, {{-1, 1}, mixed}, {{0, 2}, mixed}, {{-1, 0}, mixed}, {{1, 2}, mixed}});
}

MultilinearPolynomial closed_p3(const Rational& b) { return centered_sum({{{-1, 0, 1}, -b}, {{0, 1, 2}, -b}}); }

}  // namespace

std::vector<CheckResult> run_exact_identities(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  const Rational b(3, 2);

  for (int m : options.m_list) {
    out.push_back(timed("gradient condition m=" + std::to_string(m), [&](std::string& detail) {
      const GradientReport report = verify_gradient_condition(m);
      detail = std::to_string(report.checked_patterns) + " patterns";
      if (!report.passed) detail += "; " + report.first_failure;
      return report.passed;
    }));
  }

  out.push_back(timed("antisymmetric decomposition m=2 closed forms", [&](std::string& detail) {
    for (const Rational& rho : densities()) {
      const PolynomialDecomposition d = asym_polynomials(2, rho, b);
      if (d.max_degree() != 3 || !d.degree(0).is_zero() || !(d.degree(1) == closed_p1(rho, b)) ||
          !(d.degree(2) == closed_p2(rho, b)) || !(d.degree(3) == closed_p3(b))) {
        detail = "mismatch at rho = " + to_string(rho);
        return false;
      }
    }
    detail = std::to_string(densities().size()) + " densities";
    return true;
  }));

  for (int m : options.m_list) {
    out.push_back(timed("antisymmetric decomposition reproduces the current m=" + std::to_string(m),
                        [&](std::string& detail) {
                          const RateSpec rates{m, b, false};
                          const LocalFunction current = current_function(rates, GeneratorPart::antisymmetric);
                          for (const Rational& rho : densities()) {
                            const PolynomialDecomposition d = asym_polynomials(m, rho, b);
                            const Rational mean = expectation(current, rho);
                            const MultilinearPolynomial total = d.total();
                            for (int k = 1; k <= d.max_degree(); ++k) {
                              for (const auto& [mono, coeff] : d.degree(k).terms()) {
                                if (static_cast<int>(mono.size()) != k) {
                                  detail = "inhomogeneous part of degree " + std::to_string(k);
                                  return false;
                                }
                              }
                            }
                            for (std::uint32_t bits = 0; bits < current.size(); ++bits) {
                              const PatternView eta{bits, current.first()};
                              if (total.evaluate_centered(eta, rho) != current[bits] - mean) {
                                detail = "pattern " + std::to_string(bits) + " at rho = " + to_string(rho);
                                return false;
                              }
                            }
                          }
                          detail = std::to_string(densities().size()) + " densities";
                          return true;
                        }));
  }

  out.push_back(timed("centering formula k<=5", [&](std::string& detail) {
    long checked = 0;
    for (int k = 1; k <= 5; ++k) {
      std::vector<int> sites;
      for (int i = 0; i < k; ++i) sites.push_back(2 * i - 3);
      for (const Rational& rho : densities()) {
        const PolynomialDecomposition d = center_monomial(sites, rho);
        for (int deg = 0; deg <= k; ++deg) {
          for (const auto& [mono, coeff] : d.degree(deg).terms()) {
            if (static_cast<int>(mono.size()) != deg || coeff != pow(rho, static_cast<unsigned>(k - deg))) return false;
          }
        }
        const MultilinearPolynomial total = d.total();
        for (std::uint32_t bits = 0; bits < (1U << (sites.back() - sites.front() + 1)); ++bits) {
          const PatternView eta{bits, sites.front()};
          int product = 1;
          for (int s : sites) product *= eta(s);
          if (total.evaluate_centered(eta, rho) != product) return false;
          ++checked;
        }
      }
    }
    detail = std::to_string(checked) + " pattern evaluations";
    return true;
  }));

  for (int m : options.m_list) {
    const std::string label = options.corrupt_rates ? " (corrupted rates)" : "";
    out.push_back(timed("stationarity width " + std::to_string(options.stationarity_width) + " m=" + std::to_string(m) + label,
                        [&](std::string& detail) {
                          const RateSpec rates{m, b, options.corrupt_rates};
                          const StationarityReport report = verify_stationarity(rates, options.stationarity_width);
                          detail = std::to_string(report.checked_patterns) + " patterns";
                          if (!report.passed) detail += "; " + report.first_failure;
                          return report.passed;
                        }));
  }

  for (int m : options.m_list) {
    out.push_back(timed("degree-one gradient at rho=m/(m+1) m=" + std::to_string(m), [&](std::string& detail) {
      for (const Rational& bb : {Rational(1), Rational(-7, 4)}) {
        const Rational rho(m, m + 1);
        const LocalFunction g = degree_one_gradient_g(m, bb);
        const LocalFunction p1 = asym_polynomials(m, rho, bb).degree(1).to_local_function_centered(rho);
        if (expectation(g, rho) != 0 || !p1.equals(g - g.translated(1))) {
          detail = "b = " + to_string(bb);
          return false;
        }
      }
      detail = "b in {1, -7/4}";
      return true;
    }));
  }

  out.push_back(timed("F''(2/3) = -4b at m=2", [&](std::string& detail) {
    for (const Rational& bb : {Rational(1), Rational(3, 2), Rational(-2)}) {
      const ExactThermo thermo(2, bb);
      if (thermo.flux_second(Rational(2, 3)) != -4 * bb) {
        detail = "b = " + to_string(bb);
        return false;
      }
    }
    detail = "b in {1, 3/2, -2}";
    return true;
  }));
  return out;
}

std::vector<CheckResult> run_bad_box_checks() {
  std::vector<CheckResult> out;
  for (int m : {2, 3}) {
    out.push_back(timed("bad-box bound m=" + std::to_string(m), [&](std::string& detail) {
      long checked = 0;
      for (const Rational& rho : {Rational(1, 4), Rational(1, 2), Rational(2, 3), Rational(3, 4)}) {
        for (long ell = m; ell <= 20; ++ell) {
          const Rational exact = exact_bad_box_probability(rho, ell, m);
          const Rational bound = bad_box_bound(rho, ell, m);
          if (exact > bound || (ell == m && exact != bound)) {
            detail = "rho = " + to_string(rho) + ", ell = " + std::to_string(ell);
            return false;
          }
          ++checked;
        }
      }
      detail = std::to_string(checked) + " (rho, ell) pairs";
      return true;
    }));
  }
  return out;
}

PathStatistics run_path_trials(int m, long trials, std::uint64_t seed) {
  PathStatistics stats;
  RandomStream rng(seed, static_cast<std::uint64_t>(m));
  while (stats.trials < trials) {
    const long size = 16 + static_cast<long>(rng.below(49));
    const double rho = 0.2 + 0.6 * rng.uniform();
    const Configuration cfg = sample_bernoulli(size, rho, rng);
    const long ell = m + static_cast<long>(rng.below(static_cast<std::uint64_t>(size / 2 - m)));
    const BoxSpec box{static_cast<long>(rng.below(static_cast<std::uint64_t>(size))), ell};
    if (!is_good_box(cfg, box, m)) continue;
    const long free_sites = size - ell;
    const long y = cfg.wrap(box.last() + 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(free_sites))));
    const long z = cfg.wrap(box.last() + 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(free_sites))));
    if (y == z || cfg(y) == cfg(z)) continue;
    ++stats.trials;
    const ExchangePath path = build_exchange_path(cfg, y, z, box, m);
    const PathReport report = validate_exchange_path(cfg, path, m);
    const long usage_bound = m == 2 ? 6 : 2 * (m + 1);
    stats.max_bond_usage = std::max<long>(stats.max_bond_usage, report.max_bond_usage);
    if (path.window_length > 0) {
      stats.fitted_constant = std::max(stats.fitted_constant, static_cast<double>(report.length) / path.window_length);
    }
    const bool ok = report.legal && report.exact && report.restored && report.max_bond_usage <= usage_bound &&
                    report.length <= path.length_bound;
    if (!ok) {
      if (stats.violations == 0) {
        std::ostringstream s;
        s << "cfg " << cfg.to_string() << " y " << y << " z " << z << " box " << box.anchor << "+" << box.length;
        stats.first_violation = s.str();
      }
      ++stats.violations;
    }
    if (path.window_length <= kMaxOracleWindow) {
      ++stats.bfs_windows;
      const ReachabilityResult bfs =
          bfs_reachability_oracle(cfg, y, z, path.window_first, path.window_length, m);
      if (!bfs.reachable || bfs.shortest > static_cast<long>(path.moves.size())) ++stats.bfs_failures;
    }
  }
  return stats;
}

std::vector<CheckResult> run_path_checks(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  for (int m : options.m_list) {
    if (m > 4) continue;
    out.push_back(timed("exchange paths m=" + std::to_string(m), [&](std::string& detail) {
      const PathStatistics stats = run_path_trials(m, options.path_trials, options.seed);
      std::ostringstream s;
      s << stats.trials << " trials, " << stats.violations << " violations, max bond usage " << stats.max_bond_usage
        << ", fitted C " << stats.fitted_constant << " (builder C " << path_length_constant(m) << "), BFS windows "
        << stats.bfs_windows << " with " << stats.bfs_failures << " failures";
      if (!stats.first_violation.empty()) s << "; first violation " << stats.first_violation;
      detail = s.str();
      return stats.violations == 0 && stats.bfs_failures == 0 && stats.bfs_windows > 0;
    }));
  }
  return out;
}

std::vector<CheckResult> run_verify(const VerifyOptions& options) {
  std::vector<CheckResult> out = run_exact_identities(options);
  for (auto& r : run_bad_box_checks()) out.push_back(std::move(r));
  for (auto& r : run_path_checks(options)) out.push_back(std::move(r));
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::none_of(results.begin(), results.end(), [](const CheckResult& r) { return r.status == CheckStatus::fail; });
}

}  // namespace kcm
