// Walk parameters, exact rational parameter values, and the derived memory
// exponent / critical parameter.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace merw {

/// Reduced fraction with 64-bit parts and a positive denominator.
/// Arithmetic is checked: overflow throws std::overflow_error.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);
};

/// A parameter in [0,1] that remembers its exact rational value when one is
/// known. Strings like "5/8", "0.625" and "1" parse exactly; anything else
/// (exponent notation, computed doubles) is kept as a float only.
class Param {
 public:
  Param() = default;
  static Param exact(std::int64_t num, std::int64_t den);
  static Param exact(Rational r);
  static Param approx(double value);
  /// Parses "num/den", a plain decimal, or any strtod-readable float.
  static Param parse(std::string_view text);
  /// Interprets a double through its shortest round-trip decimal spelling,
  /// so 0.9 becomes exactly 9/10. Used for values read from JSON.
  static Param from_decimal(double value);

  double value() const { return value_; }
  const std::optional<Rational>& exact() const { return exact_; }
  bool is_exact() const { return exact_.has_value(); }
  std::string to_string() const;

 private:
  double value_ = 0.0;
  std::optional<Rational> exact_;
};

enum class Regime { diffusive, critical, superdiffusive };

std::string_view to_string(Regime r);

struct WalkParams {
  int d = 1;
  Param p;
  std::optional<Param> q;
  /// Signed axis of the first step: +1 is e_1, -2 is -e_2.
  int initial_step = 1;

  /// Throws ValidationError unless d >= 1, p and q lie in [0,1] and the
  /// initial step names an existing axis.
  void validate() const;
};

struct DerivedConstants {
  double a = 0.0;    ///< memory exponent (2dp-1)/(2d-1)
  double p_d = 0.0;  ///< critical parameter (2d+1)/(4d)
  Regime regime = Regime::diffusive;
  std::optional<Rational> a_exact;
  Rational p_d_exact;
};

DerivedConstants derived_constants(const WalkParams& params);

/// (2dp-1)/(2d-1) as a double; the hot loops use this directly.
inline double memory_exponent(int d, double p) {
  return (2.0 * d * p - 1.0) / (2.0 * d - 1.0);
}

/// Compares x against y exactly when both are exact, else as doubles.
int compare(const Param& x, const Rational& y);
int compare(const Param& x, const Param& y);

}  // namespace merw
