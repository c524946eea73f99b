#include "kcm/local_calculus.hpp"

#include "kcm/constraint.hpp"
#include "kcm/errors.hpp"
#include "kcm/thermo.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <sstream>

namespace kcm {

std::string to_string(GeneratorPart part) {
  switch (part) {
    case GeneratorPart::full:
      return "full";
    case GeneratorPart::symmetric:
      return "symmetric";
    case GeneratorPart::antisymmetric:
      return "antisymmetric";
  }
  return "unknown";
}

LocalFunction constraint_function(int m) {
  return LocalFunction::tabulate(-(m - 1), m, [m](const PatternView& eta) { return Rational(constraint(eta, 0, m)); });
}

namespace {

struct BondRates {
  Rational right;
  Rational left;
};

// Rates of the two jumps across bond {x, x+1} at pattern eta, restricted to `part`.
template <Occupation Occ>
BondRates bond_rates(const Occ& eta, long x, const RateSpec& rates, GeneratorPart part) {
  const int c = constraint(eta, x, rates.m);
  BondRates out{Rational(0), Rational(0)};
  if (part != GeneratorPart::antisymmetric) {
    out.right = Rational(c, 2);
    out.left = Rational(c, 2);
    if (rates.corrupted) out.right += eta(x - 1);
  }
  if (part != GeneratorPart::symmetric && c != 0 && rates.skew != 0) {
    const Rational drift = rates.skew * c / 2;
    out.right += drift;
    out.left -= drift;
  }
  return out;
}

void require_order(int m) {
  if (m < 2) throw InvalidInput("constraint order m must be at least 2");
}

}  // namespace

LocalFunction apply_generator(const LocalFunction& f, const RateSpec& rates, GeneratorPart part) {
  require_order(rates.m);
  const int m = rates.m;
  const int first = f.first() - m;
  const int last = f.last() + m;
  if (last - first + 1 > LocalFunction::kMaxWidth) {
    throw SizeLimit("generator output window exceeds the enumeration cap");
  }
  return LocalFunction::tabulate(first, last, [&](const PatternView& eta) {
    Rational total(0);
    const Rational& here = f(eta);
    for (long x = f.first() - 1; x <= f.last(); ++x) {
      const int a = eta(x);
      const int b = eta(x + 1);
      if (a == b) continue;
      const BondRates r = bond_rates(eta, x, rates, part);
      const Rational& rate = (a == 1) ? r.right : r.left;
      if (rate == 0) continue;
      total += rate * (f(eta.exchanged(x, x + 1)) - here);
    }
    return total;
  });
}

LocalFunction apply_generator(const LocalFunction& f, const ModelParams& params, GeneratorPart part) {
  return apply_generator(f, RateSpec::from(params), part);
}

namespace {

// Sum_k rho^k (1-rho)^{width-k} sums[k].
Rational bernstein_sum(const std::vector<Rational>& sums, int width, const Rational& rho) {
  Rational total(0);
  const Rational q = Rational(1) - rho;
  for (int k = 0; k <= width; ++k) {
    if (sums[static_cast<std::size_t>(k)] == 0) continue;
    total += sums[static_cast<std::size_t>(k)] * pow(rho, static_cast<unsigned>(k)) *
             pow(q, static_cast<unsigned>(width - k));
  }
  return total;
}

}  // namespace

Rational expectation(const LocalFunction& f, const Rational& rho) {
  std::vector<Rational> by_count(static_cast<std::size_t>(f.width()) + 1, Rational(0));
  for (std::uint32_t p = 0; p < f.size(); ++p) by_count[static_cast<std::size_t>(std::popcount(p))] += f[p];
  return bernstein_sum(by_count, f.width(), rho);
}

StationarityReport verify_stationarity(const RateSpec& rates, int window_width,
                                       const std::vector<Rational>& extra_densities) {
  require_order(rates.m);
  if (window_width < 1 || window_width > 12) throw SizeLimit("stationarity window must have 1..12 sites");
  const int m = rates.m;
  const int w = window_width;
  const int big = w + 2 * m;  // sites [-m, w-1+m]
  const std::uint32_t window_mask = (1U << w) - 1U;
  const std::size_t columns = static_cast<std::size_t>(big) + 1;
  const std::size_t patterns = std::size_t{1} << w;

  // Integer Bernstein coefficients of the adjoint action on each indicator:
  // sym in units of 1/2, antisymmetric in units of skew/2.
  std::vector<std::int64_t> sym(patterns * columns, 0);
  std::vector<std::int64_t> asym(patterns * columns, 0);

  const std::uint32_t total = 1U << big;
  for (std::uint32_t bits = 0; bits < total; ++bits) {
    const auto occ = [bits, m](long site) { return static_cast<int>((bits >> (site + m)) & 1U); };
    const std::size_t k = static_cast<std::size_t>(std::popcount(bits));
    const std::uint32_t xi = (bits >> m) & window_mask;
    for (long x = -1; x <= w - 1; ++x) {
      const int a = occ(x);
      if (a == occ(x + 1)) continue;
      const int c = constraint(occ, x, m);
      int sym_units = c;
      if (rates.corrupted && a == 1) sym_units += 2 * occ(x - 1);
      if (sym_units == 0 && c == 0) continue;
      const std::uint32_t flipped = bits ^ (3U << (x + m));
      const std::uint32_t target = (flipped >> m) & window_mask;
      if (target == xi) continue;
      const int direction = (a == 1) ? 1 : -1;
      sym[target * columns + k] += sym_units;
      sym[xi * columns + k] -= sym_units;
      asym[target * columns + k] += direction * c;
      asym[xi * columns + k] -= direction * c;
    }
  }

  StationarityReport report;
  report.window_width = w;
  report.densities = {Rational(1, 3), Rational(1, 2), Rational(2, 3)};
  for (const auto& rho : extra_densities) report.densities.push_back(rho);
  report.checked_patterns = static_cast<long>(patterns);

  std::vector<Rational> sums(columns);
  for (std::size_t xi = 0; xi < patterns && report.passed; ++xi) {
    for (int which = 0; which < 2 && report.passed; ++which) {
      const auto& table = which == 0 ? sym : asym;
      if (which == 1 && rates.skew == 0) continue;
      for (std::size_t k = 0; k < columns; ++k) sums[k] = Rational(table[xi * columns + k]);
      for (const auto& rho : report.densities) {
        const Rational value = bernstein_sum(sums, big, rho);
        if (value != 0) {
          std::ostringstream msg;
          msg << (which == 0 ? "symmetric" : "antisymmetric") << " part, pattern ";
          for (int i = 0; i < w; ++i) msg << ((xi >> i) & 1U);
          msg << ", rho = " << rho.str() << ": integral " << (which == 0 ? value / 2 : value * rates.skew / 2).str();
          report.first_failure = msg.str();
          report.passed = false;
          break;
        }
      }
    }
  }
  return report;
}

bool verify_stationarity(const ModelParams& params, int window_width) {
  return verify_stationarity(RateSpec::from(params), window_width, {params.rho()}).passed;
}

MultilinearPolynomial h_polynomial(int m) {
  require_order(m);
  MultilinearPolynomial h;
  for (int k = 1; k <= m; ++k) {
    Monomial sites;
    for (int j = -(m - k); j <= k - 1; ++j) sites.push_back(j);
    h.add_term(sites, Rational(1));
  }
  for (int k = 1; k <= m - 1; ++k) {
    Monomial sites;
    for (int j = -(m - k); j <= k; ++j) {
      if (j != 0) sites.push_back(j);
    }
    h.add_term(sites, Rational(-1));
  }
  return h;
}

LocalFunction h_function(int m) {
  const MultilinearPolynomial h = h_polynomial(m);
  return LocalFunction::tabulate(-(m - 1), m - 1, [&h](const PatternView& eta) { return h.evaluate_occupation(eta); });
}

namespace {

template <Occupation Occ>
Rational current_value(const Occ& eta, long x, const RateSpec& rates, GeneratorPart part) {
  const int a = eta(x);
  const int b = eta(x + 1);
  if (a == b) return Rational(0);
  const BondRates r = bond_rates(eta, x, rates, part);
  return a == 1 ? r.right : Rational(-r.left);
}

}  // namespace

LocalFunction current_function(const RateSpec& rates, GeneratorPart part) {
  require_order(rates.m);
  return LocalFunction::tabulate(-(rates.m - 1), rates.m,
                                 [&](const PatternView& eta) { return current_value(eta, 0, rates, part); });
}

Rational current_at(const Configuration& cfg, long x, const RateSpec& rates, GeneratorPart part) {
  return current_value(cfg, x, rates, part);
}

Rational current_at(const Configuration& cfg, long x, const ModelParams& params, GeneratorPart part) {
  return current_at(cfg, x, RateSpec::from(params), part);
}

GradientReport verify_gradient_condition(int m, const LocalFunction& h) {
  require_order(m);
  if (m > 4) throw SizeLimit("gradient check is capped at m = 4");
  GradientReport report;
  report.m = m;
  const RateSpec rates{m, Rational(0), false};
  const Rational half(1, 2);

  const LocalFunction lhs = apply_generator(LocalFunction::occupation(0), rates, GeneratorPart::symmetric);
  LocalFunction rhs = h.translated(-1) - h - h + h.translated(1);
  rhs *= half;
  report.checked_patterns += std::int64_t{1} << std::max(lhs.width(), rhs.width());
  if (!lhs.equals(rhs)) {
    report.passed = false;
    report.first_failure = "symmetric generator of eta(0) differs from the discrete Laplacian of h/2";
    return report;
  }

  const LocalFunction current = current_function(rates, GeneratorPart::symmetric);
  LocalFunction gradient = h - h.translated(1);
  gradient *= half;
  report.checked_patterns += std::int64_t{1} << std::max(current.width(), gradient.width());
  if (!current.equals(gradient)) {
    report.passed = false;
    report.first_failure = "symmetric current differs from (h - tau_1 h)/2";
  }
  return report;
}

GradientReport verify_gradient_condition(int m) {
  require_order(m);
  if (m > 4) throw SizeLimit("gradient check is capped at m = 4");
  return verify_gradient_condition(m, h_function(m));
}

namespace {

MultilinearPolynomial constraint_polynomial(int m) {
  MultilinearPolynomial c;
  for (int k = 1; k <= m; ++k) {
    Monomial sites;
    for (int j = -(m - k); j <= k; ++j) {
      if (j != 0 && j != 1) sites.push_back(j);
    }
    c.add_term(sites, Rational(1));
  }
  return c;
}

}  // namespace

MultilinearPolynomial scaled_asym_current_polynomial(int m, const Rational& b) {
  require_order(m);
  MultilinearPolynomial activity;
  activity.add_term({0}, Rational(1));
  activity.add_term({1}, Rational(1));
  activity.add_term({0, 1}, Rational(-2));
  MultilinearPolynomial out = activity.idempotent_product(constraint_polynomial(m));
  out *= b / 2;
  return out;
}

PolynomialDecomposition asym_polynomials(int m, const Rational& rho, const Rational& b) {
  require_order(m);
  if (m > 4) throw SizeLimit("asym_polynomials is capped at m = 4");
  MultilinearPolynomial centered = center_polynomial(scaled_asym_current_polynomial(m, b), rho);
  centered.add_term({}, -centered.coefficient({}));
  PolynomialDecomposition out = PolynomialDecomposition::split(centered);
  out.degree_terms.resize(static_cast<std::size_t>(m) + 2);
  return out;
}

MultilinearPolynomial degree_one_gradient_polynomial(int m, const Rational& b, const Rational& rho) {
  require_order(m);
  if (rho != ExactThermo(m, b).critical_density()) {
    throw WrongDensity("the degree-one part is a gradient only at rho = m/(m+1)");
  }
  const MultilinearPolynomial p1 = asym_polynomials(m, rho, b).degree(1);
  MultilinearPolynomial g;
  Rational running(0);
  for (int i = -(m - 1); i <= m - 1; ++i) {
    running += p1.coefficient({i});
    g.add_term({i}, running);
  }
  running += p1.coefficient({m});
  if (running != 0) throw Error("degree-one coefficients do not sum to zero at the critical density");
  return g;
}

LocalFunction degree_one_gradient_g(int m, const Rational& b, const Rational& rho) {
  const MultilinearPolynomial g = degree_one_gradient_polynomial(m, b, rho);
  return LocalFunction::tabulate(-(m - 1), m - 1, [&](const PatternView& eta) { return g.evaluate_centered(eta, rho); });
}

LocalFunction degree_one_gradient_g(int m, const Rational& b) {
  return degree_one_gradient_g(m, b, Rational(m, m + 1));
}

Rational bond_energy(const LocalFunction& f, int m, long x, const Rational& rho) {
  require_order(m);
  const int first = std::min<int>(f.first(), static_cast<int>(x) - m + 1);
  const int last = std::max<int>(f.last(), static_cast<int>(x) + m);
  const LocalFunction integrand = LocalFunction::tabulate(first, last, [&](const PatternView& eta) {
    const int c = constraint(eta, x, m);
    if (c == 0) return Rational(0);
    const Rational diff = f(eta.exchanged(x, x + 1)) - f(eta);
    return Rational(c * diff * diff);
  });
  return expectation(integrand, rho);
}

Rational dirichlet_form_local(const LocalFunction& f, const ModelParams& params, const Rational& rho) {
  Rational total(0);
  for (long x = f.first() - 1; x <= f.last(); ++x) total += bond_energy(f, params.m(), x, rho);
  const Rational n2(static_cast<long long>(params.n()) * params.n());
  return total * n2 / 4;
}

LocalFunction right_block_average_function(int ell, const Rational& rho) {
  if (ell < 1) throw InvalidInput("block length must be positive");
  return LocalFunction::tabulate(1, ell, [&](const PatternView& eta) {
    return Rational((Rational(std::popcount(eta.bits)) - rho * ell) / ell);
  });
}

LocalFunction left_block_average_function(int ell, const Rational& rho) {
  if (ell < 1) throw InvalidInput("block length must be positive");
  return LocalFunction::tabulate(-ell, -1, [&](const PatternView& eta) {
    return Rational((Rational(std::popcount(eta.bits)) - rho * ell) / ell);
  });
}

}  // namespace kcm
