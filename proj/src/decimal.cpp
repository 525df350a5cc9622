#include "xolap/decimal.hpp"

#include <algorithm>
#include <cctype>

namespace xolap {

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow10(unsigned n) {
  cpp_int r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

// Denominator of a reduced fraction has a finite decimal expansion iff its
// only prime factors are 2 and 5; returns the number of fraction digits.
std::optional<unsigned> terminating_digits(cpp_int den) {
  unsigned twos = 0, fives = 0;
  while (den % 2 == 0) { den /= 2; ++twos; }
  while (den % 5 == 0) { den /= 5; ++fives; }
  if (den != 1) return std::nullopt;
  return std::max(twos, fives);
}

std::string render_scaled(const cpp_int& scaled_abs, unsigned frac_digits, bool negative) {
  std::string digits = scaled_abs.str();
  if (digits.size() <= frac_digits) digits.insert(0, frac_digits - digits.size() + 1, '0');
  std::string int_part = digits.substr(0, digits.size() - frac_digits);
  std::string frac_part = digits.substr(digits.size() - frac_digits);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  std::string out = negative && (int_part != "0" || !frac_part.empty()) ? "-" : "";
  out += int_part;
  if (!frac_part.empty()) out += "." + frac_part;
  return out;
}

}  // namespace

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  std::size_t int_begin = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  std::string_view int_digits = text.substr(int_begin, i - int_begin);
  std::string_view frac_digits;
  if (i < text.size() && text[i] == '.') {
    std::size_t frac_begin = ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    frac_digits = text.substr(frac_begin, i - frac_begin);
    if (frac_digits.empty()) return std::nullopt;
  }
  if (i != text.size() || int_digits.empty()) return std::nullopt;

  // cpp_int reads a leading 0 as an octal prefix, so strip leading zeros.
  std::string digits = std::string(int_digits) + std::string(frac_digits);
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  cpp_int num(digits);
  Rational r(num, pow10(static_cast<unsigned>(frac_digits.size())));
  return Decimal(negative ? Rational(-r) : r);
}

std::string Decimal::str() const {
  const cpp_int num = boost::multiprecision::numerator(value_);
  const cpp_int den = boost::multiprecision::denominator(value_);
  const bool negative = num < 0;
  const cpp_int abs_num = negative ? cpp_int(-num) : num;

  if (auto digits = terminating_digits(den)) {
    cpp_int scaled = abs_num * pow10(*digits) / den;
    return render_scaled(scaled, *digits, negative);
  }

  // 12 significant digits, half-to-even. Find exponent e with
  // 10^(e-1) <= |x| < 10^e, then scale by 10^(12-e).
  int e = static_cast<int>(cpp_int(abs_num / den).str().size());
  if (abs_num < den) {
    e = 0;
    cpp_int probe = abs_num * 10;
    while (probe < den) { probe *= 10; --e; }
  }
  const int shift = 12 - e;
  cpp_int n = abs_num, d = den;
  if (shift >= 0) n *= pow10(static_cast<unsigned>(shift));
  else d *= pow10(static_cast<unsigned>(-shift));
  cpp_int q = n / d;
  cpp_int rem = n % d;
  if (rem * 2 > d || (rem * 2 == d && q % 2 == 1)) ++q;
  if (shift >= 0) return render_scaled(q, static_cast<unsigned>(shift), negative);
  return render_scaled(q * pow10(static_cast<unsigned>(-shift)), 0, negative);
}

std::string canonical_number(std::string_view text) {
  auto d = Decimal::parse(text);
  return d ? d->str() : std::string(text);
}

}  // namespace xolap
