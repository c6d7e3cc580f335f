#include "semrex/decimal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace semrex {

namespace {

constexpr unsigned max_scale = 36;

__int128 checked_mul(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("decimal overflow");
  return r;
}

__int128 checked_add(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("decimal overflow");
  return r;
}

__int128 pow10(unsigned n) {
  __int128 r = 1;
  for (unsigned i = 0; i < n; ++i) r = checked_mul(r, 10);
  return r;
}

std::string digits_of(__int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s += static_cast<char>('0' + static_cast<int>(v % 10));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string format(__int128 m, unsigned scale) {
  bool negative = m < 0;
  std::string digits = digits_of(negative ? -m : m);
  if (scale > 0) {
    if (digits.size() <= scale) digits.insert(0, scale - digits.size() + 1, '0');
    digits.insert(digits.size() - scale, ".");
  }
  return (negative ? "-" : "") + digits;
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  __int128 m = 0;
  int scale = 0;
  bool any_digit = false, in_fraction = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      m = checked_add(checked_mul(m, 10), c - '0');
      if (in_fraction) ++scale;
      any_digit = true;
    } else if (c == '.' && !in_fraction) {
      in_fraction = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw std::invalid_argument("not a decimal number: '" + std::string(text) + "'");
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) exp_negative = text[i++] == '-';
    int exponent = 0;
    bool exp_digit = false;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 100) throw std::invalid_argument("decimal exponent out of range");
      exp_digit = true;
    }
    if (!exp_digit) throw std::invalid_argument("missing exponent digits: '" + std::string(text) + "'");
    scale += exp_negative ? exponent : -exponent;
  }
  if (i != text.size()) throw std::invalid_argument("trailing characters in decimal: '" + std::string(text) + "'");
  if (scale < 0) {
    m = checked_mul(m, pow10(static_cast<unsigned>(-scale)));
    scale = 0;
  }
  if (static_cast<unsigned>(scale) > max_scale) throw std::invalid_argument("decimal has too many fractional digits");
  return Decimal(negative ? -m : m, static_cast<unsigned>(scale)).normalized();
}

Decimal Decimal::rescaled(unsigned scale) const {
  if (scale < scale_) throw std::logic_error("rescaled() only widens");
  return Decimal(checked_mul(mantissa_, pow10(scale - scale_)), scale);
}

Decimal Decimal::normalized() const {
  Decimal d = *this;
  while (d.scale_ > 0 && d.mantissa_ % 10 == 0) {
    d.mantissa_ /= 10;
    --d.scale_;
  }
  return d;
}

Decimal Decimal::operator+(const Decimal& o) const {
  unsigned s = std::max(scale_, o.scale_);
  return Decimal(checked_add(rescaled(s).mantissa_, o.rescaled(s).mantissa_), s).normalized();
}

Decimal Decimal::operator-(const Decimal& o) const { return *this + Decimal(-o.mantissa_, o.scale_); }

Decimal Decimal::operator*(const Decimal& o) const {
  unsigned s = scale_ + o.scale_;
  if (s > max_scale) throw std::overflow_error("decimal product has too many fractional digits");
  return Decimal(checked_mul(mantissa_, o.mantissa_), s).normalized();
}

std::strong_ordering Decimal::operator<=>(const Decimal& o) const {
  unsigned s = std::max(scale_, o.scale_);
  return rescaled(s).mantissa_ <=> o.rescaled(s).mantissa_;
}

std::string Decimal::to_string() const {
  Decimal n = normalized();
  return format(n.mantissa_, n.scale_);
}

std::string Decimal::to_fixed(unsigned places) const {
  if (places >= scale_) return format(rescaled(places).mantissa_, places);
  __int128 divisor = pow10(scale_ - places);
  __int128 q = mantissa_ / divisor;
  __int128 r = mantissa_ % divisor;
  __int128 twice = r < 0 ? -2 * r : 2 * r;
  if (twice >= divisor) q += mantissa_ < 0 ? -1 : 1;
  return format(q, places);
}

double Decimal::to_double() const { return std::stod(to_string()); }

}  // namespace semrex
