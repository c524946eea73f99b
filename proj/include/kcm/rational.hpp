#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <string_view>

namespace kcm {

/// Exact rational scalar used by every identity check.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

/// Parses "3/4", "-2", "0.125" or "1e-3" into an exact rational.
/// Decimal input is converted digit by digit, never through a double.
Rational parse_rational(std::string_view text);

/// Exact value of a finite double (every double is a dyadic rational).
Rational rational_from_double(double value);

std::string to_string(const Rational& value);

inline double to_double(const Rational& value) { return value.convert_to<double>(); }

/// base^exponent for a non-negative integer exponent.
Rational pow(const Rational& base, unsigned exponent);

}  // namespace kcm
