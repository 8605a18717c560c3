// Exact moments r_n = E W_1^n of the one-dimensional superdiffusive limit,
// the derived moments of Y_1, and power-series characteristic functions.
#pragma once

#include <complex>
#include <vector>

#include <gmpxx.h>

#include "merw/params.hpp"

namespace merw {

struct MomentTable {
  mpq_class p;
  int order = 0;
  std::vector<mpq_class> r;  ///< r[0] = 1, r[1..order]
  std::vector<double> y;     ///< y[n] = E Y_1^n = r_n / Gamma((2p-1)n + 1)

  double r_double(int n) const { return r[static_cast<std::size_t>(n)].get_d(); }
};

/// Exact rational value of a parameter (binary value of the double when the
/// parameter has no exact form).
mpq_class to_mpq(const Param& p);

/// Throws RegimeError unless 3/4 < p <= 1. `order` must be >= 1.
MomentTable moment_recursion(const Param& p, int order);
MomentTable moment_recursion(const mpq_class& p, int order);

struct MomentBoundReport {
  bool holds = true;
  /// log(bound_n / |r_n|) for n = 1..order; 0 means the bound is attained.
  std::vector<double> log_margin;
};

/// Checks |r_n| <= (p/(2p-1))^{n-1} n! in exact arithmetic.
MomentBoundReport verify_moment_bound(const MomentTable& table);

struct SeriesValue {
  std::complex<double> value;
  double truncation_bound = 0.0;  ///< first omitted term of the majorant
};

/// sum_{n<=N} r_n (ix)^n / n!. Throws DomainError unless |x| < (2p-1)/p.
SeriesValue charfun_series_w(const MomentTable& table, double x, int n_terms);
/// sum_{n<=N} r_n (ix)^n / (Gamma((2p-1)n+1) n!), entire in x.
SeriesValue charfun_series_y(const MomentTable& table, double x, int n_terms);

/// Power-series coefficients c_0..c_K of the characteristic function of
/// w = sum_i W_d(i), from matching powers of x in
/// phi + a x phi' = A phi^2 + B |phi|^2. Throws RegimeError unless p > p_d.
std::vector<std::complex<double>> series_coefficients_general_d(int d, double p, int K);

std::complex<double> eval_series(const std::vector<std::complex<double>>& c, double x);

}  // namespace merw
