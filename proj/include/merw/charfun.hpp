// Characteristic function of w on a uniform grid by integrating the real
// first-order system for (f, g) = (Re phi, Im phi), tail-decay diagnostics,
// and density recovery by Fourier inversion.
#pragma once

#include <string>
#include <vector>

namespace merw {

struct CharFunOptions {
  double x0 = 1e-3;  ///< start of the integration, away from the x = 0 singularity
  int series_order = 12;
  double rtol = 1e-10;
  double atol = 1e-12;
  double norm_tol = 1e-8;  ///< |phi|^2 may exceed 1 by this much
};

struct CharFunGrid {
  int d = 1;
  double p = 1.0;
  double a = 1.0;
  std::string method;  ///< "series" or "ode"
  std::vector<double> x;
  std::vector<double> f;
  std::vector<double> g;

  /// Index of x = 0 on a symmetric grid.
  std::size_t origin() const { return x.size() / 2; }
};

/// Symmetric grid x_k = k h for k = -M..M with M = round(x_max / h).
/// Throws RegimeError unless p > p_d, IntegrationError when |phi| > 1 + tol
/// or the step size collapses.
CharFunGrid integrate_charfun_ode(int d, double p, double x_max, double h,
                                  const CharFunOptions& opt = {});

struct TailCheck {
  double sup = 0.0;    ///< sup over the grid of |x|^{1/a} |phi(x)|
  double slope = 0.0;  ///< least-squares slope of log(|x|^{1/a}|phi|) vs log x, last decade
  bool stable = false; ///< slope <= 0.05
};

/// Requires a grid reaching x_max >= 50.
TailCheck tail_exponent_check(const CharFunGrid& grid);

struct DensityEstimate {
  std::vector<double> x;
  std::vector<double> pw;
  double mass = 0.0;
  double min_value = 0.0;
  double x_max = 0.0;       ///< truncation of the inversion integral
  double quad_step = 0.0;
  double tail_bound = 0.0;  ///< sup/pi * int_{X}^inf z^{-1/a} dz; +inf when 1/a <= 1
  TailCheck tail;

  /// Cumulative trapezoid of pw, normalised by nothing.
  std::vector<double> cdf() const;
  /// Linear interpolation of cdf() at t (0 left of the grid, mass right of it).
  double cdf_at(double t) const;
};

/// p(x) = (1/pi) int_0^X [f(z) cos(xz) + g(z) sin(xz)] dz by the trapezoid rule
/// on the grid's nonnegative half, evaluated on [x_lo, x_hi] with step dx.
/// Throws IntegrationError if the tail check fails.
DensityEstimate density_fourier_inversion(const CharFunGrid& grid, double x_lo, double x_hi,
                                          double dx);

}  // namespace merw
