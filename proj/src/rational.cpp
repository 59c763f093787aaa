#include "fmeca/rational.hpp"

#include <cctype>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace fmeca {

namespace {

using Wide = __int128;

std::int64_t narrow(Wide value) {
  if (value > Wide(INT64_MAX) || value < Wide(INT64_MIN)) {
    throw std::overflow_error("rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(value);
}

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make_normalized(Wide num, Wide den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw std::invalid_argument("rational with zero denominator");
  Wide num = numerator;
  Wide den = denominator;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = narrow(num);
  den_ = narrow(den);
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::operator+(const Rational& other) const {
  return make_normalized(Wide(num_) * other.den_ + Wide(other.num_) * den_,
                         Wide(den_) * other.den_);
}

Rational Rational::operator-(const Rational& other) const {
  return make_normalized(Wide(num_) * other.den_ - Wide(other.num_) * den_,
                         Wide(den_) * other.den_);
}

Rational Rational::operator*(const Rational& other) const {
  return make_normalized(Wide(num_) * other.num_, Wide(den_) * other.den_);
}

Rational Rational::operator/(const Rational& other) const {
  if (other.num_ == 0) throw std::invalid_argument("rational division by zero");
  return make_normalized(Wide(num_) * other.den_, Wide(den_) * other.num_);
}

bool Rational::operator==(const Rational& other) const {
  return num_ == other.num_ && den_ == other.den_;
}

std::strong_ordering Rational::operator<=>(const Rational& other) const {
  Wide lhs = Wide(num_) * other.den_;
  Wide rhs = Wide(other.num_) * den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);

  // A finite decimal expansion exists iff the denominator is 2^a * 5^b.
  std::int64_t rest = den_;
  int twos = 0, fives = 0;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++fives;
  }
  if (rest != 1) {
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  int digits = twos > fives ? twos : fives;
  Wide scaled = Wide(num_);
  for (int i = 0; i < digits; ++i) scaled *= 10;
  scaled /= den_;

  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string raw;
  if (scaled == 0) raw = "0";
  while (scaled > 0) {
    raw.insert(raw.begin(), static_cast<char>('0' + int(scaled % 10)));
    scaled /= 10;
  }
  while (static_cast<int>(raw.size()) <= digits) raw.insert(raw.begin(), '0');

  std::string out = raw.substr(0, raw.size() - digits) + "." + raw.substr(raw.size() - digits);
  while (out.back() == '0') out.pop_back();
  if (out.back() == '.') out.pop_back();
  return negative ? "-" + out : out;
}

std::optional<Rational> Rational::parse(std::string_view text) {
  size_t begin = 0, end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  text = text.substr(begin, end - begin);
  if (text.empty()) return std::nullopt;

  size_t slash = text.find('/');
  if (slash != std::string_view::npos) {
    auto num = parse(text.substr(0, slash));
    auto den = parse(text.substr(slash + 1));
    if (!num || !den || !num->is_integer() || !den->is_integer() || den->num() == 0) {
      return std::nullopt;
    }
    try {
      return Rational(num->num(), den->num());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = text[pos] == '-';
    ++pos;
  }

  Wide mantissa = 0;
  int frac_digits = 0;
  bool any_digit = false;
  bool seen_dot = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
      continue;
    }
    if (c == 'e' || c == 'E') break;
    if (c < '0' || c > '9') return std::nullopt;
    any_digit = true;
    mantissa = mantissa * 10 + (c - '0');
    if (mantissa > Wide(INT64_MAX) * 100) return std::nullopt;
    if (seen_dot) ++frac_digits;
  }
  if (!any_digit) return std::nullopt;

  int exponent = 0;
  if (pos < text.size()) {
    ++pos;  // consume 'e'
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    if (pos == text.size()) return std::nullopt;
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c < '0' || c > '9') return std::nullopt;
      exponent = exponent * 10 + (c - '0');
      if (exponent > 64) return std::nullopt;
    }
    if (exp_negative) exponent = -exponent;
  }

  Wide num = negative ? -mantissa : mantissa;
  Wide den = 1;
  int shift = exponent - frac_digits;
  for (int i = 0; i < shift; ++i) {
    num *= 10;
    if (num > Wide(INT64_MAX) * 1000 || num < Wide(INT64_MIN) * 1000) return std::nullopt;
  }
  for (int i = 0; i < -shift; ++i) den *= 10;

  try {
    return make_normalized(num, den);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace fmeca
