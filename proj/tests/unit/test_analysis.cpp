#include "kcm/analysis.hpp"
#include "kcm/errors.hpp"
#include "kcm/kmc.hpp"
#include "kcm/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace kcm;

TEST_SUITE("analysis") {
  TEST_CASE("trajectory farm keeps results in index order for any thread count") {
    const auto square = [](std::size_t i) {
      RandomStream rng(3, i);
      return rng.uniform() + static_cast<double>(i);
    };
    const auto one = run_farm(100, 1, square);
    const auto four = run_farm(100, 4, square);
    REQUIRE(one.size() == 100);
    CHECK(one == four);
    for (std::size_t i = 0; i < 100; ++i) CHECK(std::floor(one[i]) == static_cast<double>(i));
    CHECK_THROWS_AS(run_farm(10, 3,
                             [](std::size_t i) -> int {
                               if (i == 7) throw std::runtime_error("boom");
                               return 0;
                             }),
                    std::runtime_error);
    CHECK(run_farm(0, 2, square).empty());
  }

  TEST_CASE("squared expectation excludes and counts truncated runs") {
    const std::vector<double> values{1.0, 2.0, 100.0, 3.0};
    const std::vector<std::uint8_t> flags{0, 0, 1, 0};
    const SquaredExpectation est = squared_expectation(values, flags);
    CHECK(est.total == 4);
    CHECK(est.excluded == 1);
    CHECK(est.report.n_samples == 3);
    CHECK(est.report.estimate == doctest::Approx(14.0 / 3.0));
    CHECK_THROWS_AS(squared_expectation(values, std::vector<std::uint8_t>{0}), InvalidInput);
  }

  TEST_CASE("power-law fit") {
    const std::vector<double> ns{32, 64, 128, 256};
    std::vector<double> exact;
    for (double n : ns) exact.push_back(3.0 * std::pow(n, -1.25));
    const ScalingFit fit = fit_power_law(ns, exact);
    CHECK(fit.exponent == doctest::Approx(-1.25));
    CHECK(fit.prefactor == doctest::Approx(3.0));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.exponent_std_error == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit.points.size() == 4);
    std::vector<double> noisy = exact;
    noisy[1] *= 1.3;
    noisy[2] *= 0.8;
    const ScalingFit rough = fit_power_law(ns, noisy);
    CHECK(rough.r_squared < 1.0);
    CHECK(rough.exponent_std_error > 0.0);
    CHECK_THROWS_AS(fit_power_law(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidInput);
    CHECK_THROWS_AS(fit_power_law(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, -1.0}), InvalidInput);
    CHECK_THROWS_AS(fit_power_law(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 3.0}), InvalidInput);
  }

  TEST_CASE("bgp2 bound and its optimal block length") {
    const double t = 0.5;
    const double n = 128;
    const double eps = 0.25;
    CHECK(bgp2_rhs_bound(t, eps * n, n, 2.0) == doctest::Approx(2.0 * t * (eps + t / (eps * eps * n))));
    CHECK(bgp2_rhs_bound(0.0, 10, n, 1.0) == 0.0);
    // Calculus oracle: d/dl (l/n + t n / l^2) = 1/n - 2 t n / l^3 vanishes at l*.
    const double star = optimal_block_length(t, n);
    CHECK(1.0 / n - 2.0 * t * n / (star * star * star) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bgp2_rhs_bound(t, star, n, 1.0) < bgp2_rhs_bound(t, 0.9 * star, n, 1.0));
    CHECK(bgp2_rhs_bound(t, star, n, 1.0) < bgp2_rhs_bound(t, 1.1 * star, n, 1.0));
    // l* grows like (t n^2)^{1/3}.
    CHECK(optimal_block_length(t, 2 * n) / star == doctest::Approx(std::cbrt(4.0)));
    CHECK(optimal_block_length(8 * t, n) / star == doctest::Approx(2.0));
  }

  TEST_CASE("bound constant and trend checks") {
    CHECK(fit_bound_constant(std::vector<double>{1.0, 3.0}, std::vector<double>{2.0, 2.0}) == doctest::Approx(1.5));
    CHECK_THROWS_AS(fit_bound_constant(std::vector<double>{1.0}, std::vector<double>{0.0}), InvalidInput);
    const std::vector<double> se{0.1, 0.1, 0.1};
    CHECK(nonincreasing_within(std::vector<double>{1.0, 0.9, 0.8}, se, 2.0));
    CHECK(nonincreasing_within(std::vector<double>{1.0, 1.2, 1.1}, se, 2.0));
    CHECK_FALSE(nonincreasing_within(std::vector<double>{1.0, 1.3, 1.1}, se, 2.0));
  }

  TEST_CASE("OU covariance oracle") {
    const double rho = 2.0 / 3.0;
    const double chi = rho * (1.0 - rho);
    const TestFunction h = TestFunction::gaussian(0.0, 0.5);
    // t = 0: chi ||H||^2 with ||H||^2 = sigma sqrt(pi).
    CHECK(ou_covariance_oracle(h, h, 0.0, rho, 2) == doctest::Approx(chi * 0.5 * std::sqrt(std::numbers::pi)).epsilon(1e-10));
    for (double t : {0.01, 0.1, 0.5, 1.0, 4.0}) {
      CHECK(ou_covariance_oracle(h, h, t, rho, 2) == doctest::Approx(gaussian_ou_covariance(0.5, t, rho, 2)).epsilon(1e-9));
      CHECK(ou_covariance_oracle(h, h, t, 0.75, 3) == doctest::Approx(gaussian_ou_covariance(0.5, t, 0.75, 3)).epsilon(1e-9));
    }
    CHECK(gaussian_ou_covariance(0.5, 0.0, rho, 2) == doctest::Approx(chi * 0.5 * std::sqrt(std::numbers::pi)));
    CHECK(gaussian_ou_covariance(0.5, 1e6, rho, 2) < 1e-3);
    const TestFunction g = TestFunction::hermite(1, 0.4, 0.7);
    CHECK(ou_covariance_oracle(h, g, 0.3, rho, 2) == doctest::Approx(ou_covariance_oracle(g, h, 0.3, rho, 2)).epsilon(1e-9));
    CHECK(std::abs(ou_covariance_oracle(h, g, 1e4, rho, 2)) < 1e-3);
    CHECK_THROWS_AS(ou_covariance_oracle(h, h, -1.0, rho, 2), InvalidInput);
  }

  TEST_CASE("Jarque-Bera separates normal from skewed samples") {
    RandomStream gauss(11, 0);
    RandomStream expo(11, 1);
    std::vector<double> normal;
    std::vector<double> skewed;
    for (int i = 0; i < 5000; ++i) {
      normal.push_back(gauss.normal());
      skewed.push_back(expo.exponential());
    }
    const NormalityTest a = jarque_bera(normal);
    const NormalityTest b = jarque_bera(skewed);
    CHECK(a.p_value > 0.01);
    CHECK(std::abs(a.skewness) < 0.2);
    CHECK(b.p_value < 1e-10);
    CHECK(b.skewness == doctest::Approx(2.0).epsilon(0.2));
    CHECK_THROWS_AS(jarque_bera(std::vector<double>(10, 1.0)), InvalidInput);
  }

  TEST_CASE("equilibrium field law at small n") {
    const ModelParams params(2, Rational(2, 3), 0.0, 1.0, 32);
    const EquilibriumFieldReport report = equilibrium_field_law(params, TestFunction::gaussian(0.0, 0.5), 4000, 9, 2);
    CHECK(std::abs(report.variance.z_score(report.exact_variance)) < 4.0);
    CHECK(report.normality.p_value > 0.01);
  }

  TEST_CASE("term estimates reproduce the stored-trajectory integrals and are thread independent") {
    const ModelParams params(2, Rational(2, 3), 1.0, 1.0, 16);
    TermGridRequest request{params};
    request.terms = {TermSpec{TermKind::bgp2_inner, 1, 2, 0.25}, TermSpec{TermKind::triple, 1, 2}};
    request.times = {0.05, 0.1};
    request.n_traj = 16;
    request.seed = 5;
    const TermGridResult serial = estimate_terms(request);
    request.threads = 3;
    const TermGridResult parallel = estimate_terms(request);
    for (std::size_t k = 0; k < 16; ++k) CHECK(serial.trajectories[k].values == parallel.trajectories[k].values);
    CHECK(serial.estimates[0][1].report.estimate == parallel.estimates[0][1].report.estimate);
    CHECK(serial.estimates[0][1].report.parameters.at("ell") == 4.0);
    CHECK(serial.blocked_probability_bound < 1e-10);

    const TestFunction h = TestFunction::gaussian();
    for (std::size_t k = 0; k < 4; ++k) {
      const Trajectory traj = run(params, 0.1, 0.05, 5, k);
      for (std::size_t i = 0; i < request.terms.size(); ++i) {
        const double direct =
            time_integral_term(traj, request.terms[i], params, default_term_weights(request.terms[i], params, h), 0.1);
        CHECK(serial.trajectories[k].values[i][1] == doctest::Approx(direct).epsilon(1e-9));
      }
    }

    request.n_traj = 8;
    CHECK_THROWS_AS(estimate_terms(request), InvalidInput);
    request.n_traj = 16;
    request.times = {0.1, 0.05};
    CHECK_THROWS_AS(estimate_terms(request), InvalidInput);
  }

  TEST_CASE("degree-one term estimate is exactly zero at b = 0") {
    TermGridRequest request{ModelParams(2, Rational(2, 3), 0.0, 1.0, 16)};
    request.terms = {TermSpec{TermKind::deg1}};
    request.times = {0.1};
    request.n_traj = 16;
    const TermGridResult result = estimate_terms(request);
    CHECK(result.estimates[0][0].report.estimate == 0.0);
    CHECK(result.estimates[0][0].report.std_error == 0.0);
  }

  TEST_CASE("four times the trajectories halves the standard error") {
    TermGridRequest request{ModelParams(2, Rational(2, 3), 1.0, 1.0, 16)};
    request.terms = {TermSpec{TermKind::bgp2_inner, 1, 2, 0.25}};
    request.times = {0.1};
    request.n_traj = 100;
    request.seed = 1;
    const double small = estimate_terms(request).estimates[0][0].report.std_error;
    request.n_traj = 400;
    request.seed = 2;
    const double large = estimate_terms(request).estimates[0][0].report.std_error;
    CHECK(small / large == doctest::Approx(2.0).epsilon(0.3));
  }

  TEST_CASE("mean current and equal-time covariance at small n") {
    const ModelParams params(2, Rational(2, 3), 1.0, 1.0, 16);
    const EstimatorReport current = estimate_mean_current(params, 0.5, 64, 3, 2);
    // m = 2: 2 b rho^2 (1 - rho) / n^gamma.
    CHECK(exact_mean_current(params) == doctest::Approx(2.0 * (4.0 / 9.0) * (1.0 / 3.0) / 16.0));
    CHECK(std::abs(current.z_score(exact_mean_current(params))) < 4.0);

    const TestFunction h = TestFunction::gaussian(0.0, 0.5);
    CovarianceRequest request{params};
    request.functions = {h};
    request.times = {0.0, 0.05};
    request.n_traj = 400;
    const CovarianceResult cov = estimate_covariance(request);
    CHECK(cov.excluded == 0);
    CHECK(std::abs(cov.estimates[0][0].z_score(exact_field_variance(h, params))) < 4.0);
    CHECK(cov.estimates[0][1].parameters.at("t") == 0.05);
  }
}
