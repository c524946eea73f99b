#include "kcm/polynomial.hpp"

#include "kcm/errors.hpp"

#include <algorithm>
#include <sstream>

namespace kcm {

MultilinearPolynomial MultilinearPolynomial::constant(const Rational& value) {
  MultilinearPolynomial p;
  p.add_term({}, value);
  return p;
}

MultilinearPolynomial MultilinearPolynomial::variable(int site) {
  MultilinearPolynomial p;
  p.add_term({site}, Rational(1));
  return p;
}

void MultilinearPolynomial::add_term(Monomial sites, const Rational& coeff) {
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw InvalidInput("multilinear monomials need distinct sites");
  }
  if (coeff == 0) return;
  auto [it, inserted] = terms_.try_emplace(std::move(sites), coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0) terms_.erase(it);
  }
}

int MultilinearPolynomial::max_degree() const {
  int degree = -1;
  for (const auto& [sites, coeff] : terms_) degree = std::max(degree, static_cast<int>(sites.size()));
  return degree;
}

Rational MultilinearPolynomial::coefficient(const Monomial& sites) const {
  Monomial key = sites;
  std::sort(key.begin(), key.end());
  const auto it = terms_.find(key);
  return it == terms_.end() ? Rational(0) : it->second;
}

MultilinearPolynomial MultilinearPolynomial::homogeneous_part(int degree) const {
  MultilinearPolynomial out;
  for (const auto& [sites, coeff] : terms_) {
    if (static_cast<int>(sites.size()) == degree) out.terms_.emplace(sites, coeff);
  }
  return out;
}

MultilinearPolynomial MultilinearPolynomial::idempotent_product(const MultilinearPolynomial& other) const {
  MultilinearPolynomial out;
  for (const auto& [a, ca] : terms_) {
    for (const auto& [b, cb] : other.terms_) {
      Monomial merged;
      std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
      out.add_term(std::move(merged), ca * cb);
    }
  }
  return out;
}

MultilinearPolynomial MultilinearPolynomial::translated(int shift) const {
  MultilinearPolynomial out;
  for (const auto& [sites, coeff] : terms_) {
    Monomial moved = sites;
    for (int& x : moved) x += shift;
    out.terms_.emplace(std::move(moved), coeff);
  }
  return out;
}

MultilinearPolynomial& MultilinearPolynomial::operator+=(const MultilinearPolynomial& other) {
  for (const auto& [sites, coeff] : other.terms_) add_term(sites, coeff);
  return *this;
}

MultilinearPolynomial& MultilinearPolynomial::operator-=(const MultilinearPolynomial& other) {
  for (const auto& [sites, coeff] : other.terms_) add_term(sites, -coeff);
  return *this;
}

MultilinearPolynomial& MultilinearPolynomial::operator*=(const Rational& factor) {
  if (factor == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [sites, coeff] : terms_) coeff *= factor;
  return *this;
}

Rational MultilinearPolynomial::evaluate_occupation(const PatternView& eta) const {
  return evaluate([&eta](int x) { return Rational(eta(x)); });
}

Rational MultilinearPolynomial::evaluate_centered(const PatternView& eta, const Rational& rho) const {
  const Rational one_minus = Rational(1) - rho;
  const Rational minus_rho = -rho;
  return evaluate([&](int x) { return eta(x) == 1 ? one_minus : minus_rho; });
}

std::pair<int, int> MultilinearPolynomial::support() const {
  bool any = false;
  int lo = 0;
  int hi = 0;
  for (const auto& [sites, coeff] : terms_) {
    for (int x : sites) {
      if (!any) {
        lo = hi = x;
        any = true;
      }
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  return {lo, hi};
}

LocalFunction MultilinearPolynomial::to_local_function_centered(const Rational& rho) const {
  const auto [lo, hi] = support();
  return LocalFunction::tabulate(lo, hi, [&](const PatternView& eta) { return evaluate_centered(eta, rho); });
}

std::string MultilinearPolynomial::to_string(const std::string& variable) const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [sites, coeff] : terms_) {
    if (!first) out << " + ";
    first = false;
    out << coeff.str();
    for (int x : sites) out << "*" << variable << "(" << x << ")";
  }
  return out.str();
}

MultilinearPolynomial PolynomialDecomposition::total() const {
  MultilinearPolynomial sum;
  for (const auto& part : degree_terms) sum += part;
  return sum;
}

PolynomialDecomposition PolynomialDecomposition::split(const MultilinearPolynomial& centered) {
  PolynomialDecomposition out;
  const int top = std::max(centered.max_degree(), 0);
  out.degree_terms.resize(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) out.degree_terms[static_cast<std::size_t>(k)] = centered.homogeneous_part(k);
  return out;
}

namespace {

void expand_monomial(const Monomial& sites, const Rational& coeff, const Rational& rho,
                     MultilinearPolynomial& out) {
  const std::size_t k = sites.size();
  const std::uint32_t subsets = 1U << k;
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    Monomial kept;
    for (std::size_t i = 0; i < k; ++i) {
      if ((mask >> i) & 1U) kept.push_back(sites[i]);
    }
    const auto missing = static_cast<unsigned>(k - kept.size());
    out.add_term(std::move(kept), coeff * pow(rho, missing));
  }
}

}  // namespace

PolynomialDecomposition center_monomial(std::span<const int> sites, const Rational& rho) {
  if (sites.size() > 8) throw SizeLimit("center_monomial supports at most 8 sites");
  Monomial sorted(sites.begin(), sites.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("center_monomial needs distinct sites");
  }
  MultilinearPolynomial centered;
  expand_monomial(sorted, Rational(1), rho, centered);
  auto out = PolynomialDecomposition::split(centered);
  out.degree_terms.resize(sorted.size() + 1);
  return out;
}

MultilinearPolynomial center_polynomial(const MultilinearPolynomial& occupation_poly, const Rational& rho) {
  MultilinearPolynomial centered;
  for (const auto& [sites, coeff] : occupation_poly.terms()) expand_monomial(sites, coeff, rho, centered);
  return centered;
}

}  // namespace kcm
