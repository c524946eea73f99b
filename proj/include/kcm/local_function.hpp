#pragma once

#include "kcm/errors.hpp"
#include "kcm/rational.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace kcm {

/// Occupation pattern on a contiguous window: bit i holds the occupation of
/// site origin + i. Reading outside the window is a logic error.
struct PatternView {
  std::uint32_t bits = 0;
  int origin = 0;

  int operator()(long site) const { return static_cast<int>((bits >> (site - origin)) & 1U); }

  /// Pattern with the occupations of sites x and y exchanged.
  PatternView exchanged(long x, long y) const {
    const std::uint32_t bx = (bits >> (x - origin)) & 1U;
    const std::uint32_t by = (bits >> (y - origin)) & 1U;
    if (bx == by) return *this;
    const std::uint32_t mask = (1U << (x - origin)) | (1U << (y - origin));
    return PatternView{bits ^ mask, origin};
  }
};

/// Exact table of a function of the occupations on the window [first, last]
/// (relative coordinates). Entry p of the table is the value at the pattern
/// whose bit i is the occupation of site first + i.
class LocalFunction {
 public:
  static constexpr int kMaxWidth = 24;

  /// Zero function on [first, last]. Throws SizeLimit above kMaxWidth sites.
  LocalFunction(int first, int last);

  template <class F>
  static LocalFunction tabulate(int first, int last, F&& value_at) {
    LocalFunction f(first, last);
    for (std::uint32_t p = 0; p < f.size(); ++p) f.table_[p] = value_at(PatternView{p, first});
    return f;
  }

  /// eta(site), tabulated on [site, site].
  static LocalFunction occupation(int site);
  static LocalFunction constant(const Rational& value);

  int first() const { return first_; }
  int last() const { return last_; }
  int width() const { return last_ - first_ + 1; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(table_.size()); }

  const Rational& operator[](std::uint32_t pattern) const { return table_[pattern]; }
  Rational& operator[](std::uint32_t pattern) { return table_[pattern]; }

  /// Value at a pattern whose window contains [first, last].
  const Rational& operator()(const PatternView& eta) const {
    const std::uint32_t mask = (width() >= 32) ? 0xffffffffU : ((1U << width()) - 1U);
    return table_[(eta.bits >> (first_ - eta.origin)) & mask];
  }

  /// The same function re-tabulated on a window containing the current one.
  LocalFunction extended(int first, int last) const;

  /// tau_shift f, i.e. eta -> f(tau_shift eta) with (tau_s eta)(y) = eta(s + y).
  LocalFunction translated(int shift) const;

  LocalFunction& operator+=(const LocalFunction& other);
  LocalFunction& operator-=(const LocalFunction& other);
  LocalFunction& operator*=(const Rational& factor);

  friend LocalFunction operator+(LocalFunction a, const LocalFunction& b) { return a += b; }
  friend LocalFunction operator-(LocalFunction a, const LocalFunction& b) { return a -= b; }
  friend LocalFunction operator*(LocalFunction a, const Rational& s) { return a *= s; }
  friend LocalFunction operator*(const Rational& s, LocalFunction a) { return a *= s; }
  /// Pointwise product, tabulated on the union window.
  friend LocalFunction operator*(const LocalFunction& a, const LocalFunction& b);

  /// Pointwise equality as functions (compared on the union window).
  bool equals(const LocalFunction& other) const;

  bool is_zero() const;

 private:
  int first_;
  int last_;
  std::vector<Rational> table_;
};

}  // namespace kcm
