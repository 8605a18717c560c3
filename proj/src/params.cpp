#include "merw/params.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "merw/errors.hpp"

namespace merw {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

Rational make(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 a = n < 0 ? -n : n;
  i128 b = d;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  Rational r;
  r.num = narrow(n);
  r.den = narrow(d);
  return r;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) { *this = make(n, d); }

std::string Rational::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make(i128{a.num} * b.den + i128{b.num} * a.den, i128{a.den} * b.den);
}
Rational operator-(const Rational& a, const Rational& b) {
  return make(i128{a.num} * b.den - i128{b.num} * a.den, i128{a.den} * b.den);
}
Rational operator*(const Rational& a, const Rational& b) {
  return make(i128{a.num} * b.num, i128{a.den} * b.den);
}
Rational operator/(const Rational& a, const Rational& b) {
  return make(i128{a.num} * b.den, i128{a.den} * b.num);
}
std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return i128{a.num} * b.den <=> i128{b.num} * a.den;
}

Param Param::exact(std::int64_t num, std::int64_t den) { return exact(Rational(num, den)); }

Param Param::exact(Rational r) {
  Param p;
  p.exact_ = r;
  p.value_ = r.to_double();
  return p;
}

Param Param::approx(double value) {
  Param p;
  p.value_ = value;
  return p;
}

namespace {

std::optional<Rational> parse_decimal(std::string_view s) {
  bool neg = false;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    neg = s[i] == '-';
    ++i;
  }
  i128 num = 0;
  i128 den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    seen_digit = true;
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    if (num > INT64_MAX || den > INT64_MAX) return std::nullopt;
  }
  if (!seen_digit) return std::nullopt;
  return make(neg ? -num : num, den);
}

}  // namespace

Param Param::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw ValidationError("empty parameter value");
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto n = parse_decimal(text.substr(0, slash));
    const auto d = parse_decimal(text.substr(slash + 1));
    if (!n || !d || d->num == 0) {
      throw ValidationError("malformed rational parameter '" + std::string(text) + "'");
    }
    return exact(*n / *d);
  }
  if (const auto r = parse_decimal(text)) return exact(*r);
  const std::string copy(text);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (end == copy.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ValidationError("malformed parameter '" + copy + "'");
  }
  return approx(v);
}

Param Param::from_decimal(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  const std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
  if (const auto r = parse_decimal(text)) return exact(*r);
  return approx(value);
}

std::string Param::to_string() const {
  if (exact_) return exact_->to_string();
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value_);
  return std::string(buf, res.ptr);
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::diffusive: return "diffusive";
    case Regime::critical: return "critical";
    case Regime::superdiffusive: return "superdiffusive";
  }
  return "unknown";
}

int compare(const Param& x, const Rational& y) {
  if (x.exact()) {
    const auto c = *x.exact() <=> y;
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  const double yv = y.to_double();
  return x.value() < yv ? -1 : (x.value() > yv ? 1 : 0);
}

int compare(const Param& x, const Param& y) {
  if (y.exact()) return compare(x, *y.exact());
  return x.value() < y.value() ? -1 : (x.value() > y.value() ? 1 : 0);
}

void WalkParams::validate() const {
  if (d < 1) throw ValidationError("dimension d must be >= 1");
  if (d > 64) throw ValidationError("dimension d must be <= 64");
  if (!(p.value() >= 0.0 && p.value() <= 1.0)) throw ValidationError("p must lie in [0,1]");
  if (q && !(q->value() >= 0.0 && q->value() <= 1.0)) {
    throw ValidationError("q must lie in [0,1]");
  }
  if (initial_step == 0 || initial_step > d || initial_step < -d) {
    throw ValidationError("initial_step must be a signed axis in [-d,-1] or [1,d]");
  }
}

DerivedConstants derived_constants(const WalkParams& params) {
  params.validate();
  const std::int64_t d = params.d;
  DerivedConstants out;
  out.p_d_exact = Rational(2 * d + 1, 4 * d);
  out.p_d = out.p_d_exact.to_double();
  out.a = memory_exponent(params.d, params.p.value());
  if (params.p.exact()) {
    const Rational& p = *params.p.exact();
    out.a_exact = (Rational(2 * d) * p - Rational(1)) / Rational(2 * d - 1);
    out.a = out.a_exact->to_double();
  }
  const int c = compare(params.p, out.p_d_exact);
  out.regime = c < 0 ? Regime::diffusive : (c == 0 ? Regime::critical : Regime::superdiffusive);
  return out;
}

}  // namespace merw
