#pragma once

#include "kcm/local_function.hpp"
#include "kcm/rational.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace kcm {

/// Sorted list of distinct sites; the monomial prod_{x in sites} v(x).
using Monomial = std::vector<int>;

/// Multilinear polynomial with exact coefficients. The same container holds
/// polynomials in the occupations eta(x) and in the centered variables
/// eta-bar(x) = eta(x) - rho; which one is meant is fixed by the producer.
class MultilinearPolynomial {
 public:
  MultilinearPolynomial() = default;
  static MultilinearPolynomial constant(const Rational& value);
  static MultilinearPolynomial variable(int site);

  /// Adds coeff * prod_{sites}. Throws InvalidInput on repeated sites.
  void add_term(Monomial sites, const Rational& coeff);

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int max_degree() const;

  /// Coefficient of a monomial (zero when absent).
  Rational coefficient(const Monomial& sites) const;

  /// The degree-k homogeneous part.
  MultilinearPolynomial homogeneous_part(int degree) const;

  /// Product for occupation variables (eta(x)^2 = eta(x)).
  MultilinearPolynomial idempotent_product(const MultilinearPolynomial& other) const;

  MultilinearPolynomial translated(int shift) const;

  MultilinearPolynomial& operator+=(const MultilinearPolynomial& other);
  MultilinearPolynomial& operator-=(const MultilinearPolynomial& other);
  MultilinearPolynomial& operator*=(const Rational& factor);
  friend MultilinearPolynomial operator+(MultilinearPolynomial a, const MultilinearPolynomial& b) { return a += b; }
  friend MultilinearPolynomial operator-(MultilinearPolynomial a, const MultilinearPolynomial& b) { return a -= b; }
  friend MultilinearPolynomial operator*(MultilinearPolynomial a, const Rational& s) { return a *= s; }
  friend MultilinearPolynomial operator*(const Rational& s, MultilinearPolynomial a) { return a *= s; }

  bool operator==(const MultilinearPolynomial& other) const { return terms_ == other.terms_; }

  /// Value with every variable v(x) replaced by value_of(x).
  template <class ValueOf>
  Rational evaluate(ValueOf&& value_of) const {
    Rational total(0);
    for (const auto& [sites, coeff] : terms_) {
      Rational term = coeff;
      for (int x : sites) term *= value_of(x);
      total += term;
    }
    return total;
  }

  /// Value at a pattern when the variables are eta(x).
  Rational evaluate_occupation(const PatternView& eta) const;
  /// Value at a pattern when the variables are eta(x) - rho.
  Rational evaluate_centered(const PatternView& eta, const Rational& rho) const;

  /// Smallest window containing every site, or {0, 0} for a constant.
  std::pair<int, int> support() const;

  /// Tabulation of the centered polynomial on its support.
  LocalFunction to_local_function_centered(const Rational& rho) const;

  /// Human-readable form, e.g. "-2/9*e(-1) + 1/3*e(0)e(1)".
  std::string to_string(const std::string& variable = "e") const;

 private:
  std::map<Monomial, Rational> terms_;
};

/// Centered polynomial split into homogeneous parts: degree_terms[k] is the
/// homogeneous part of degree k in the eta-bar variables.
struct PolynomialDecomposition {
  std::vector<MultilinearPolynomial> degree_terms;

  const MultilinearPolynomial& degree(int k) const { return degree_terms.at(static_cast<std::size_t>(k)); }
  int max_degree() const { return static_cast<int>(degree_terms.size()) - 1; }
  MultilinearPolynomial total() const;

  static PolynomialDecomposition split(const MultilinearPolynomial& centered);
};

/// eta(x_1)...eta(x_k) written as a sum of homogeneous polynomials in the
/// centered variables: sum over subsets S of rho^{k-|S|} prod_{x in S} eta-bar(x).
/// Throws InvalidInput on duplicate sites and SizeLimit for k > 8.
PolynomialDecomposition center_monomial(std::span<const int> sites, const Rational& rho);

/// Rewrites a polynomial in the occupations as one in the centered variables.
MultilinearPolynomial center_polynomial(const MultilinearPolynomial& occupation_poly, const Rational& rho);

}  // namespace kcm
