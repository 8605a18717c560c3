#include "merw/moments.hpp"

#include <cmath>
#include <string>

#include "merw/errors.hpp"

namespace merw {

namespace {

double log_abs(const mpz_class& z) {
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(std::abs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

double log_abs(const mpq_class& q) { return log_abs(q.get_num()) - log_abs(q.get_den()); }

mpz_class binomial(unsigned long n, unsigned long k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

mpz_class factorial(unsigned long n) {
  mpz_class out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

}  // namespace

mpq_class to_mpq(const Param& p) {
  if (p.exact()) {
    mpq_class q(mpz_class(std::to_string(p.exact()->num)),
                mpz_class(std::to_string(p.exact()->den)));
    q.canonicalize();
    return q;
  }
  return mpq_class(p.value());
}

MomentTable moment_recursion(const Param& p, int order) { return moment_recursion(to_mpq(p), order); }

MomentTable moment_recursion(const mpq_class& p, int order) {
  if (!(p > mpq_class(3, 4) && p <= 1)) throw RegimeError("moment recursion needs 3/4 < p <= 1");
  if (order < 1) throw ValidationError("moment order must be >= 1");
  const mpq_class t = 2 * p - 1;
  MomentTable table;
  table.p = p;
  table.order = order;
  table.r.assign(static_cast<std::size_t>(order) + 1, mpq_class(0));
  table.r[0] = 1;
  table.r[1] = 1;
  auto& r = table.r;
  for (int n = 1; n + 1 <= order; ++n) {
    const auto un = static_cast<unsigned long>(n);
    mpq_class rhs = 0;
    mpq_class coeff;
    if (n % 2 == 1) {
      for (int i = 1; i <= (n - 1) / 2; ++i) {
        rhs += 2 * mpq_class(binomial(un, 2ul * i - 1)) * r[2 * i] * r[n + 1 - 2 * i];
      }
      mpq_class second = 0;
      for (int i = 1; i <= (n + 1) / 2; ++i) {
        second += mpq_class(binomial(un, 2ul * i - 1)) * r[2 * i - 1] * r[n + 2 - 2 * i];
      }
      rhs += 2 * t * second;
      coeff = (n + 1) * t - 1;
    } else {
      for (int i = 1; i <= n / 2; ++i) {
        const mpz_class c = binomial(un, 2ul * i - 1) + binomial(un, 2ul * i);
        rhs += mpq_class(c) * r[2 * i] * r[n + 1 - 2 * i];
      }
      rhs *= 2 * p;
      coeff = n * t;
    }
    r[static_cast<std::size_t>(n) + 1] = rhs / coeff;
    r[static_cast<std::size_t>(n) + 1].canonicalize();
  }

  const double td = t.get_d();
  table.y.assign(r.size(), 0.0);
  table.y[0] = 1.0;
  for (std::size_t n = 1; n < r.size(); ++n) {
    if (sgn(r[n]) == 0) continue;
    const double log_y = log_abs(r[n]) - std::lgamma(td * static_cast<double>(n) + 1.0);
    table.y[n] = (sgn(r[n]) < 0 ? -1.0 : 1.0) * std::exp(log_y);
  }
  return table;
}

MomentBoundReport verify_moment_bound(const MomentTable& table) {
  MomentBoundReport rep;
  const mpq_class ratio = table.p / (2 * table.p - 1);
  mpq_class power = 1;
  for (int n = 1; n <= table.order; ++n) {
    if (n > 1) power *= ratio;
    const mpq_class bound = power * mpq_class(factorial(static_cast<unsigned long>(n)));
    const mpq_class mag = abs(table.r[static_cast<std::size_t>(n)]);
    if (mag > bound) rep.holds = false;
    rep.log_margin.push_back(sgn(mag) == 0 ? INFINITY : log_abs(bound) - log_abs(mag));
  }
  return rep;
}

namespace {

std::complex<double> i_power(int n) {
  switch (n % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_terms(const MomentTable& table, int n_terms) {
  if (n_terms < 0 || n_terms > table.order) {
    throw ValidationError("series needs n_terms <= table order");
  }
}

}  // namespace

SeriesValue charfun_series_w(const MomentTable& table, double x, int n_terms) {
  check_terms(table, n_terms);
  const double p = table.p.get_d();
  const double radius = (2.0 * p - 1.0) / p;
  if (!(std::abs(x) < radius)) {
    throw DomainError("|x| must be below (2p-1)/p for the series of phi_W");
  }
  SeriesValue out{{1.0, 0.0}, 0.0};
  double x_pow = 1.0;
  for (int n = 1; n <= n_terms; ++n) {
    x_pow *= x;
    const mpq_class coeff = table.r[static_cast<std::size_t>(n)] /
                            mpq_class(factorial(static_cast<unsigned long>(n)));
    out.value += coeff.get_d() * x_pow * i_power(n);
  }
  out.truncation_bound = std::pow(std::abs(x) / radius, n_terms + 1);
  return out;
}

SeriesValue charfun_series_y(const MomentTable& table, double x, int n_terms) {
  check_terms(table, n_terms);
  const double p = table.p.get_d();
  const double t = 2.0 * p - 1.0;
  SeriesValue out{{1.0, 0.0}, 0.0};
  const double log_x = std::log(std::abs(x));
  for (int n = 1; n <= n_terms; ++n) {
    const auto& rn = table.r[static_cast<std::size_t>(n)];
    if (x == 0.0 || sgn(rn) == 0) continue;
    const double log_term = log_abs(rn) - std::lgamma(n + 1.0) -
                            std::lgamma(t * n + 1.0) + n * log_x;
    double term = std::exp(log_term) * (sgn(rn) < 0 ? -1.0 : 1.0);
    if (x < 0 && n % 2 == 1) term = -term;
    out.value += term * i_power(n);
  }
  if (x != 0.0) {
    const int m = n_terms + 1;
    out.truncation_bound = std::exp((m - 1) * std::log(p / t) + m * log_x - std::lgamma(t * m + 1.0));
  }
  return out;
}

std::vector<std::complex<double>> series_coefficients_general_d(int d, double p, int K) {
  if (d < 1) throw ValidationError("d must be >= 1");
  const double p_d = (2.0 * d + 1.0) / (4.0 * d);
  if (!(p > p_d && p <= 1.0)) throw RegimeError("series coefficients need p_d < p <= 1");
  if (K < 1) throw ValidationError("K must be >= 1");
  const double a = memory_exponent(d, p);
  const double A = (d * p + d - 1.0) / (2.0 * d - 1.0);
  const double B = d * (1.0 - p) / (2.0 * d - 1.0);
  std::vector<std::complex<double>> c(static_cast<std::size_t>(K) + 1);
  c[0] = 1.0;
  c[1] = {0.0, 1.0};
  for (int k = 2; k <= K; ++k) {
    std::complex<double> R = 0.0;
    for (int j = 1; j < k; ++j) {
      const auto& cj = c[static_cast<std::size_t>(j)];
      const auto& ck = c[static_cast<std::size_t>(k - j)];
      R += A * cj * ck + B * cj * std::conj(ck);
    }
    c[static_cast<std::size_t>(k)] = {R.real() / (a * k - 1.0), R.imag() / (a * (k - 1.0))};
  }
  return c;
}

std::complex<double> eval_series(const std::vector<std::complex<double>>& c, double x) {
  std::complex<double> acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace merw
