#include "merw/charfun.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "merw/errors.hpp"
#include "merw/moments.hpp"

namespace merw {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

struct FgSystem {
  double a, C, D;
  void operator()(const State& s, State& ds, double x) const {
    const double f = s[0];
    const double g = s[1];
    ds[0] = (f * f + C * g * g - f) / (a * x);
    ds[1] = (D * f * g - g) / (a * x);
  }
};

void check_norm(double f, double g, double x, double tol) {
  if (!(f * f + g * g <= 1.0 + tol)) {
    throw IntegrationError("|phi|^2 = " + std::to_string(f * f + g * g) + " exceeds 1 at x = " +
                           std::to_string(x));
  }
}

}  // namespace

CharFunGrid integrate_charfun_ode(int d, double p, double x_max, double h,
                                  const CharFunOptions& opt) {
  if (!(h > 0.0) || !(x_max >= h)) throw ValidationError("grid needs 0 < h <= x_max");
  const auto coeffs = series_coefficients_general_d(d, p, opt.series_order);
  const double a = memory_exponent(d, p);
  const FgSystem sys{a, (1.0 - 2.0 * d * p) / (2.0 * d - 1.0),
                     2.0 * (d * p + d - 1.0) / (2.0 * d - 1.0)};

  const auto M = static_cast<std::size_t>(std::llround(x_max / h));
  std::vector<double> fp(M + 1);
  std::vector<double> gp(M + 1);
  fp[0] = 1.0;
  gp[0] = 0.0;

  const std::complex<double> phi0 = eval_series(coeffs, opt.x0);
  State s{phi0.real(), phi0.imag()};
  auto dense = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
  dense.initialize(s, opt.x0, std::min(1e-4, opt.x0));

  State out{};
  for (std::size_t k = 1; k <= M; ++k) {
    const double xk = static_cast<double>(k) * h;
    if (xk <= opt.x0) {
      const auto v = eval_series(coeffs, xk);
      fp[k] = v.real();
      gp[k] = v.imag();
      continue;
    }
    while (dense.current_time() < xk) {
      dense.do_step(sys);
      const auto& cur = dense.current_state();
      check_norm(cur[0], cur[1], dense.current_time(), opt.norm_tol);
      if (dense.current_time_step() < 1e-14 * dense.current_time()) {
        throw IntegrationError("step size underflow at x = " +
                               std::to_string(dense.current_time()));
      }
    }
    dense.calc_state(xk, out);
    check_norm(out[0], out[1], xk, opt.norm_tol);
    fp[k] = out[0];
    gp[k] = out[1];
  }

  CharFunGrid grid;
  grid.d = d;
  grid.p = p;
  grid.a = a;
  grid.method = "ode";
  grid.x.resize(2 * M + 1);
  grid.f.resize(2 * M + 1);
  grid.g.resize(2 * M + 1);
  for (std::size_t k = 0; k <= M; ++k) {
    const double xk = static_cast<double>(k) * h;
    grid.x[M + k] = xk;
    grid.x[M - k] = -xk;
    grid.f[M + k] = grid.f[M - k] = fp[k];
    grid.g[M + k] = gp[k];
    grid.g[M - k] = -gp[k];
  }
  return grid;
}

TailCheck tail_exponent_check(const CharFunGrid& grid) {
  if (grid.x.empty() || grid.x.back() < 50.0) {
    throw ValidationError("tail check needs a grid reaching x >= 50");
  }
  const double inv_a = 1.0 / grid.a;
  const double x_end = grid.x.back();
  TailCheck tc;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = grid.origin(); k < grid.x.size(); ++k) {
    const double x = grid.x[k];
    if (x <= 0.0) continue;
    const double mod = std::hypot(grid.f[k], grid.g[k]);
    const double v = std::pow(x, inv_a) * mod;
    tc.sup = std::max(tc.sup, v);
    if (x >= x_end / 10.0 && v > 0.0) {
      const double lx = std::log(x);
      const double ly = std::log(v);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
  }
  if (m >= 2) tc.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  tc.stable = std::isfinite(tc.sup) && tc.slope <= 0.05;
  return tc;
}

DensityEstimate density_fourier_inversion(const CharFunGrid& grid, double x_lo, double x_hi,
                                          double dx) {
  if (!(dx > 0.0) || !(x_hi > x_lo)) throw ValidationError("bad density grid");
  DensityEstimate est;
  est.tail = tail_exponent_check(grid);
  if (!est.tail.stable) {
    throw IntegrationError("tail of |phi| is not decaying like |x|^{-1/a}; inversion refused");
  }
  const std::size_t o = grid.origin();
  const std::size_t M = grid.x.size() - 1 - o;
  const double h = grid.x[o + 1] - grid.x[o];
  est.x_max = grid.x.back();
  est.quad_step = h;
  const double inv_a = 1.0 / grid.a;
  est.tail_bound = inv_a > 1.0
                       ? est.tail.sup / M_PI * std::pow(est.x_max, 1.0 - inv_a) / (inv_a - 1.0)
                       : INFINITY;

  const auto nx = static_cast<std::size_t>(std::llround((x_hi - x_lo) / dx)) + 1;
  est.x.resize(nx);
  est.pw.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    const double x = x_lo + static_cast<double>(j) * dx;
    const std::complex<double> rot = std::polar(1.0, x * h);
    std::complex<double> e = 1.0;
    double acc = 0.0;
    for (std::size_t k = 0; k <= M; ++k) {
      const double w = (k == 0 || k == M) ? 0.5 : 1.0;
      acc += w * (grid.f[o + k] * e.real() + grid.g[o + k] * e.imag());
      e *= rot;
    }
    est.x[j] = x;
    est.pw[j] = acc * h / M_PI;
  }
  est.min_value = est.pw[0];
  for (std::size_t j = 0; j < nx; ++j) {
    est.min_value = std::min(est.min_value, est.pw[j]);
    if (j > 0) est.mass += 0.5 * (est.pw[j] + est.pw[j - 1]) * (est.x[j] - est.x[j - 1]);
  }
  return est;
}

std::vector<double> DensityEstimate::cdf() const {
  std::vector<double> c(x.size(), 0.0);
  for (std::size_t j = 1; j < x.size(); ++j) {
    c[j] = c[j - 1] + 0.5 * (pw[j] + pw[j - 1]) * (x[j] - x[j - 1]);
  }
  return c;
}

double DensityEstimate::cdf_at(double t) const {
  const auto c = cdf();
  if (t <= x.front()) return 0.0;
  if (t >= x.back()) return c.back();
  const double step = x[1] - x[0];
  const auto j = static_cast<std::size_t>((t - x.front()) / step);
  const double frac = (t - x[j]) / step;
  return c[j] + frac * (c[j + 1] - c[j]);
}

}  // namespace merw
