#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "merw/charfun.hpp"
#include "merw/errors.hpp"
#include "merw/moments.hpp"

using namespace merw;

TEST_CASE("p = 1 integrates to 1/(1 - ix)") {
  const auto g = integrate_charfun_ode(1, 1.0, 20.0, 0.05);
  REQUIRE(g.x.size() == 801);
  CHECK(g.x[g.origin()] == 0.0);
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const auto exact = 1.0 / std::complex<double>(1.0, -g.x[k]);
    CHECK(std::abs(std::complex<double>(g.f[k], g.g[k]) - exact) < 1e-8);
  }
}

TEST_CASE("grid symmetry and norm") {
  const auto g = integrate_charfun_ode(2, 0.9, 10.0, 0.05);
  const auto o = g.origin();
  for (std::size_t k = 1; k <= o; ++k) {
    CHECK(g.f[o + k] == g.f[o - k]);
    CHECK(g.g[o + k] == -g.g[o - k]);
    CHECK(std::hypot(g.f[o + k], g.g[o + k]) <= 1.0 + 1e-8);
  }
}

TEST_CASE("ode agrees with the moment series inside its disc") {
  const auto t = moment_recursion(Param::exact(9, 10), 160);
  const auto g = integrate_charfun_ode(1, 0.9, 0.7, 0.01);
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const auto s = charfun_series_w(t, g.x[k], 160);
    CHECK(std::abs(s.value - std::complex<double>(g.f[k], g.g[k])) < 1e-6);
  }
}

TEST_CASE("ode agrees with the general-d series near the origin") {
  for (int d : {2, 3}) {
    const auto c = series_coefficients_general_d(d, 0.95, 40);
    const auto g = integrate_charfun_ode(d, 0.95, 0.2, 0.01);
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      CHECK(std::abs(eval_series(c, g.x[k]) - std::complex<double>(g.f[k], g.g[k])) < 1e-6);
    }
  }
}

TEST_CASE("regime check") {
  CHECK_THROWS_AS(integrate_charfun_ode(1, 0.75, 5.0, 0.1), RegimeError);
  CHECK_THROWS_AS(integrate_charfun_ode(2, 0.6, 5.0, 0.1), RegimeError);
}

TEST_CASE("tail decay") {
  const auto g = integrate_charfun_ode(1, 0.9, 60.0, 0.02);
  const auto tail = tail_exponent_check(g);
  CHECK(tail.stable);
  CHECK(std::isfinite(tail.sup));
  const auto short_grid = integrate_charfun_ode(1, 0.9, 10.0, 0.02);
  CHECK_THROWS(tail_exponent_check(short_grid));
}

TEST_CASE("density of the exponential law at p = 1") {
  const auto g = integrate_charfun_ode(1, 1.0, 1000.0, 0.01);
  const auto de = density_fourier_inversion(g, -3.0, 15.0, 0.01);
  double l1 = 0.0;
  for (std::size_t k = 0; k < de.x.size(); ++k) {
    const double x = de.x[k];
    if (std::abs(x) < 0.1) continue;
    l1 += std::abs(de.pw[k] - (x > 0 ? std::exp(-x) : 0.0)) * 0.01;
  }
  CHECK(l1 < 0.02);
  CHECK(de.mass == doctest::Approx(1.0).epsilon(0.02));
  CHECK(de.cdf_at(-10.0) == 0.0);
  CHECK(de.cdf_at(1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.02));
  CHECK(std::isinf(de.tail_bound));
}

TEST_CASE("density of w at p = 0.9 has unit mass and mean") {
  const auto g = integrate_charfun_ode(1, 0.9, 200.0, 0.01);
  const auto de = density_fourier_inversion(g, -15.0, 15.0, 0.01);
  double mean = 0.0;
  for (std::size_t k = 0; k < de.x.size(); ++k) mean += de.x[k] * de.pw[k] * 0.01;
  CHECK(de.mass == doctest::Approx(1.0).epsilon(0.01));
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(de.min_value > -0.01);
}
