#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace paraprobe {

/// Exact rational with a positive, reduced denominator. Used for score lattice
/// arithmetic so that half-point scales are decidable without float slop.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);  // NOLINT(google-explicit-constructor)

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  bool is_integer() const noexcept { return den_ == 1; }

  /// Parses "3", "-2", "3.5", "0.25" exactly. Throws Error(kInvalidArgument)
  /// on anything else.
  static Rational parse_decimal(std::string_view text);

  /// Recovers the rational behind a double that came from a short decimal
  /// (config files, JSON). Denominators up to 10^6 are considered.
  static Rational from_double(double value);

  /// Minimal decimal form ("3.5", "4", "0.25"); falls back to "a/b" when the
  /// denominator has prime factors other than 2 and 5.
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Minimal decimal rendering of a real score: at most four fractional digits,
/// trailing zeros dropped ("3.5", not "3.50").
std::string format_score(double value);

}  // namespace paraprobe
