#include "kcm/local_function.hpp"

#include <algorithm>
#include <string>

namespace kcm {

LocalFunction::LocalFunction(int first, int last) : first_(first), last_(last) {
  if (last < first) throw InvalidInput("local function window is empty");
  if (width() > kMaxWidth) {
    throw SizeLimit("local function window of " + std::to_string(width()) + " sites exceeds the cap of " +
                    std::to_string(kMaxWidth));
  }
  table_.assign(std::size_t{1} << width(), Rational(0));
}

LocalFunction LocalFunction::occupation(int site) {
  LocalFunction f(site, site);
  f.table_[1] = 1;
  return f;
}

LocalFunction LocalFunction::constant(const Rational& value) {
  LocalFunction f(0, 0);
  f.table_[0] = value;
  f.table_[1] = value;
  return f;
}

LocalFunction LocalFunction::extended(int first, int last) const {
  if (first > first_ || last < last_) throw InvalidInput("extension window must contain the current window");
  if (first == first_ && last == last_) return *this;
  return tabulate(first, last, [this](const PatternView& eta) { return (*this)(eta); });
}

LocalFunction LocalFunction::translated(int shift) const {
  LocalFunction out = *this;
  out.first_ += shift;
  out.last_ += shift;
  return out;
}

namespace {

template <class Op>
LocalFunction combine(const LocalFunction& a, const LocalFunction& b, Op op) {
  const int first = std::min(a.first(), b.first());
  const int last = std::max(a.last(), b.last());
  return LocalFunction::tabulate(first, last, [&](const PatternView& eta) { return op(a(eta), b(eta)); });
}

}  // namespace

LocalFunction& LocalFunction::operator+=(const LocalFunction& other) {
  if (other.first_ == first_ && other.last_ == last_) {
    for (std::size_t p = 0; p < table_.size(); ++p) table_[p] += other.table_[p];
    return *this;
  }
  *this = combine(*this, other, [](const Rational& x, const Rational& y) { return Rational(x + y); });
  return *this;
}

LocalFunction& LocalFunction::operator-=(const LocalFunction& other) {
  if (other.first_ == first_ && other.last_ == last_) {
    for (std::size_t p = 0; p < table_.size(); ++p) table_[p] -= other.table_[p];
    return *this;
  }
  *this = combine(*this, other, [](const Rational& x, const Rational& y) { return Rational(x - y); });
  return *this;
}

LocalFunction& LocalFunction::operator*=(const Rational& factor) {
  for (auto& v : table_) v *= factor;
  return *this;
}

LocalFunction operator*(const LocalFunction& a, const LocalFunction& b) {
  return combine(a, b, [](const Rational& x, const Rational& y) { return Rational(x * y); });
}

bool LocalFunction::equals(const LocalFunction& other) const {
  const int first = std::min(first_, other.first_);
  const int last = std::max(last_, other.last_);
  const std::uint32_t count = 1U << (last - first + 1);
  for (std::uint32_t p = 0; p < count; ++p) {
    const PatternView eta{p, first};
    if ((*this)(eta) != other(eta)) return false;
  }
  return true;
}

bool LocalFunction::is_zero() const {
  return std::all_of(table_.begin(), table_.end(), [](const Rational& v) { return v == 0; });
}

}  // namespace kcm
