#pragma once

#include "kcm/configuration.hpp"
#include "kcm/local_function.hpp"
#include "kcm/model.hpp"
#include "kcm/polynomial.hpp"
#include "kcm/rational.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kcm {

enum class GeneratorPart { full, symmetric, antisymmetric };

std::string to_string(GeneratorPart part);

/// Jump rates of one bond {x, x+1}. A particle at x jumps right at rate
/// c (1/2 + skew/2), a particle at x+1 jumps left at rate c (1/2 - skew/2).
/// The symmetric part keeps the 1/2 weights, the antisymmetric part the
/// +-skew/2 weights.
///
/// `corrupted` adds an extra right-jump rate eta(x-1) to the symmetric part.
/// That rate table does not leave the Bernoulli measures invariant and is used
/// as a negative control for the stationarity check.
struct RateSpec {
  int m = 2;
  Rational skew = 0;
  bool corrupted = false;

  static RateSpec from(const ModelParams& params) { return RateSpec{params.m(), params.exact_skew(), false}; }
};

/// The constraint c^m_{0,1} as a local function on [-(m-1), m].
LocalFunction constraint_function(int m);

/// L f (without the n^2 acceleration), or its symmetric/antisymmetric part,
/// tabulated on [f.first() - m, f.last() + m]. Throws SizeLimit when that
/// window exceeds LocalFunction::kMaxWidth.
LocalFunction apply_generator(const LocalFunction& f, const RateSpec& rates, GeneratorPart part = GeneratorPart::full);
LocalFunction apply_generator(const LocalFunction& f, const ModelParams& params,
                              GeneratorPart part = GeneratorPart::full);

/// Bernoulli(rho) expectation, exact.
Rational expectation(const LocalFunction& f, const Rational& rho);

struct StationarityReport {
  bool passed = true;
  int window_width = 0;
  std::vector<Rational> densities;
  long checked_patterns = 0;
  /// First pattern and density with a nonzero integral, when the check fails.
  std::string first_failure;
};

/// Checks that the integral of L(1_{eta|W = xi}) against nu_rho vanishes for
/// every pattern xi on a window of `window_width` sites, separately for the
/// symmetric and antisymmetric parts, at rho in {1/3, 1/2, 2/3} and at any
/// extra densities given. Requires window_width <= 12.
StationarityReport verify_stationarity(const RateSpec& rates, int window_width,
                                       const std::vector<Rational>& extra_densities = {});
bool verify_stationarity(const ModelParams& params, int window_width);

/// h^m(eta) = sum_{k=1}^{m} prod_{j=-(m-k)}^{k-1} eta(j) - sum_{k=1}^{m-1} prod_{j=-(m-k), j != 0}^{k} eta(j),
/// tabulated on [-(m-1), m-1].
LocalFunction h_function(int m);
/// The same function as an occupation polynomial.
MultilinearPolynomial h_polynomial(int m);

/// Current across the bond {0, 1} as a local function on [-(m-1), m]:
///   full:           c (p+ eta(0)(1-eta(1)) - p- eta(1)(1-eta(0)))
///   symmetric:      (c/2)(eta(0) - eta(1)) = (h - tau_1 h)/2
///   antisymmetric:  (skew/2)(eta(0) + eta(1) - 2 eta(0)eta(1)) c
LocalFunction current_function(const RateSpec& rates, GeneratorPart part);

/// The current across bond {x, x+1} of a ring configuration.
Rational current_at(const Configuration& cfg, long x, const ModelParams& params, GeneratorPart part);
Rational current_at(const Configuration& cfg, long x, const RateSpec& rates, GeneratorPart part);

struct GradientReport {
  bool passed = true;
  int m = 0;
  long checked_patterns = 0;
  std::string first_failure;
};

/// Checks, pointwise over every pattern of the relevant window, that the
/// symmetric part of the generator applied to eta(0) equals
///   (1/2)[(tau_{-1}h - h) - (h - tau_1 h)]
/// and that the symmetric current equals (h - tau_1 h)/2.
/// Throws SizeLimit for m > 4 (the check spans up to 4m sites).
GradientReport verify_gradient_condition(int m);
/// The same check with a caller-supplied h (negative controls).
GradientReport verify_gradient_condition(int m, const LocalFunction& h);

/// P_1, ..., P_{m+1} with n^gamma (j^a - E j^a) = sum_k P_k where the
/// antisymmetric current uses skew b/n^gamma. Each P_k is homogeneous of
/// degree k in eta-bar(j) = eta(j) - rho, j in [-(m-1), m]. The returned
/// decomposition has degree_terms[0] == 0. Throws SizeLimit for m > 4.
PolynomialDecomposition asym_polynomials(int m, const Rational& rho, const Rational& b);

/// (b/2)(eta(0) + eta(1) - 2 eta(0)eta(1)) c^m_{0,1} as an occupation polynomial.
MultilinearPolynomial scaled_asym_current_polynomial(int m, const Rational& b);

/// The function g^m with tau_x P_1 = tau_x g - tau_{x+1} g and nu_rho(g) = 0,
/// a linear polynomial in eta-bar on [-(m-1), m-1].
/// Throws WrongDensity unless rho = m/(m+1).
MultilinearPolynomial degree_one_gradient_polynomial(int m, const Rational& b, const Rational& rho);
LocalFunction degree_one_gradient_g(int m, const Rational& b, const Rational& rho);
/// Same, at rho = m/(m+1).
LocalFunction degree_one_gradient_g(int m, const Rational& b);

/// I_{x,x+1}(f) = nu_rho(c_{x,x+1} (f(eta^{x,x+1}) - f)^2).
Rational bond_energy(const LocalFunction& f, int m, long x, const Rational& rho);

/// (n^2/4) sum_x I_{x,x+1}(f) over the bonds that meet the window of f.
Rational dirichlet_form_local(const LocalFunction& f, const ModelParams& params, const Rational& rho);

/// Right block average (1/ell) sum_{y=x+1}^{x+ell} eta-bar(y) as a local function at x = 0.
LocalFunction right_block_average_function(int ell, const Rational& rho);
/// Left block average (1/ell) sum_{y=x-ell}^{x-1} eta-bar(y) at x = 0.
LocalFunction left_block_average_function(int ell, const Rational& rho);

}  // namespace kcm
