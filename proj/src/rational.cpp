#include "kcm/rational.hpp"

#include "kcm/errors.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace kcm {

namespace {

using boost::multiprecision::mpz_int;

mpz_int parse_integer(std::string_view digits, std::string_view original) {
  if (digits.empty()) throw InvalidInput("malformed rational: '" + std::string(original) + "'");
  for (char ch : digits) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      throw InvalidInput("malformed rational: '" + std::string(original) + "'");
    }
  }
  return mpz_int(std::string(digits));
}

Rational parse_decimal(std::string_view text, std::string_view original) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    const mpz_int magnitude = parse_integer(exp_text, original);
    if (magnitude > 4000) throw InvalidInput("exponent out of range: '" + std::string(original) + "'");
    exponent = magnitude.convert_to<long>();
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }
  std::string digits;
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    digits = std::string(text.substr(0, dot)) + std::string(text.substr(dot + 1));
    exponent -= static_cast<long>(text.size() - dot - 1);
  } else {
    digits = std::string(text);
  }
  Rational value(parse_integer(digits, original));
  const Rational ten(10);
  if (exponent > 0) value *= pow(ten, static_cast<unsigned>(exponent));
  if (exponent < 0) value /= pow(ten, static_cast<unsigned>(-exponent));
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw InvalidInput("empty rational");
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const Rational num = parse_decimal(text.substr(0, slash), text);
    const Rational den = parse_decimal(text.substr(slash + 1), text);
    if (den == 0) throw InvalidInput("zero denominator: '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text, text);
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw InvalidInput("non-finite value has no rational form");
  // The mpq backend converts doubles exactly.
  return Rational(value);
}

std::string to_string(const Rational& value) { return value.str(); }

Rational pow(const Rational& base, unsigned exponent) {
  Rational result(1);
  Rational factor = base;
  while (exponent != 0) {
    if (exponent & 1U) result *= factor;
    exponent >>= 1U;
    if (exponent != 0) factor *= factor;
  }
  return result;
}

}  // namespace kcm
