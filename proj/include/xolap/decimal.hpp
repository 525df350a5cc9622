#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace xolap {

/// Exact decimal number backed by an arbitrary-precision rational.
///
/// Inputs are plain decimal literals (`-12`, `3.50`, `+7`); there is no
/// exponent or locale handling. Rendering is canonical: no trailing zeros,
/// no leading '+', "." separator. Values that have no finite decimal
/// expansion (e.g. 10/3 from an average) render with 12 significant digits,
/// rounded half-to-even.
class Decimal {
 public:
  using Rational = boost::multiprecision::cpp_rational;

  Decimal() = default;
  explicit Decimal(long long v) : value_(v) {}
  explicit Decimal(Rational v) : value_(std::move(v)) {}

  static std::optional<Decimal> parse(std::string_view text);
  static bool is_number(std::string_view text) { return parse(text).has_value(); }

  const Rational& rational() const { return value_; }
  std::string str() const;

  Decimal operator+(const Decimal& o) const { return Decimal(value_ + o.value_); }
  Decimal operator/(const Decimal& o) const { return Decimal(value_ / o.value_); }
  auto operator<=>(const Decimal& o) const {
    if (value_ < o.value_) return std::strong_ordering::less;
    if (value_ > o.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  bool operator==(const Decimal& o) const { return value_ == o.value_; }

 private:
  Rational value_{0};
};

/// Canonical rendering of a decimal literal; returns the input unchanged if it
/// is not a number.
std::string canonical_number(std::string_view text);

}  // namespace xolap
