#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fmeca {

/// Exact rational arithmetic for costs and budgets. Values are kept
/// normalized (gcd 1, positive denominator). Arithmetic that would leave
/// the int64 range throws std::overflow_error instead of wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t numerator) : num_(numerator), den_(1) {}
  Rational(std::int64_t numerator, std::int64_t denominator);

  /// Accepts "7", "-3.25", "1.2e3" and "n/d" forms.
  static std::optional<Rational> parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }

  /// Canonical text form: integer ("7"), minimal decimal ("10.5") when the
  /// denominator is of the form 2^a*5^b, otherwise "n/d". parse(str())
  /// round-trips to the same value, so canonical files stay byte-stable.
  std::string str() const;

  Rational operator-() const;
  Rational operator+(const Rational& other) const;
  Rational operator-(const Rational& other) const;
  Rational operator*(const Rational& other) const;
  Rational operator/(const Rational& other) const;
  Rational& operator+=(const Rational& other) { return *this = *this + other; }
  Rational& operator-=(const Rational& other) { return *this = *this - other; }

  bool operator==(const Rational& other) const;
  std::strong_ordering operator<=>(const Rational& other) const;

  static Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
  static Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace fmeca
