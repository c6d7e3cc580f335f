#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace semrex {

/// Exact base-10 number: mantissa * 10^-scale with a 128-bit mantissa.
/// Addition and multiplication are exact; overflow throws std::overflow_error.
class Decimal {
 public:
  Decimal() = default;
  Decimal(std::int64_t integer) : mantissa_(integer) {}  // NOLINT: implicit from integers is intended

  /// Accepts `[-+]digits[.digits][e[-+]digits]`, e.g. "0.15e-6".
  static Decimal parse(std::string_view text);

  Decimal operator+(const Decimal& o) const;
  Decimal operator-(const Decimal& o) const;
  Decimal operator*(const Decimal& o) const;
  Decimal& operator+=(const Decimal& o) { return *this = *this + o; }

  std::strong_ordering operator<=>(const Decimal& o) const;
  bool operator==(const Decimal& o) const { return (*this <=> o) == 0; }

  /// Shortest exact representation, no exponent: "0.0002118".
  std::string to_string() const;
  /// Exactly `places` fractional digits, rounding half away from zero when
  /// digits are dropped: to_fixed(8) of 0.0002118 is "0.00021180".
  std::string to_fixed(unsigned places) const;
  double to_double() const;

 private:
  Decimal(__int128 m, unsigned scale) : mantissa_(m), scale_(scale) {}
  Decimal rescaled(unsigned scale) const;
  Decimal normalized() const;

  __int128 mantissa_ = 0;
  unsigned scale_ = 0;
};

}  // namespace semrex
