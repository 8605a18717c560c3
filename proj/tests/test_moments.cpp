#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "merw/errors.hpp"
#include "merw/moments.hpp"

using namespace merw;

namespace {
double ey5(double p) {
  return 60.0 * p * (16.0 * p * p - 9.0 * p - 1.0) /
         ((4.0 * p - 3.0) * (4.0 * p - 3.0) * (8.0 * p - 5.0) * std::tgamma(10.0 * p - 4.0));
}
}  // namespace

TEST_CASE("p = 1 gives factorial moments") {
  const auto t = moment_recursion(Param::exact(1, 1), 20);
  mpz_class f = 1;
  CHECK(t.r[0] == 1);
  for (int n = 1; n <= 20; ++n) {
    f *= n;
    CHECK(t.r[std::size_t(n)] == mpq_class(f));
  }
}

TEST_CASE("second moment in closed form") {
  for (auto [num, den] : {std::pair{4, 5}, std::pair{9, 10}, std::pair{19, 20}}) {
    const mpq_class p(num, den);
    const auto t = moment_recursion(p, 2);
    CHECK(t.r[2] == mpq_class(2 * (2 * p - 1) / (4 * p - 3)));
  }
}

TEST_CASE("fifth moment of Y matches the closed form") {
  for (const char* p : {"0.8", "0.85", "0.9", "0.95"}) {
    const auto t = moment_recursion(Param::parse(p), 5);
    const double ref = ey5(Param::parse(p).value());
    CHECK(std::abs(t.y[5] - ref) / std::abs(ref) < 1e-10);
  }
}

TEST_CASE("Y moments are W moments over Gamma") {
  const auto t = moment_recursion(Param::exact(9, 10), 8);
  for (int n = 1; n <= 8; ++n) {
    CHECK(t.y[std::size_t(n)] ==
          doctest::Approx(t.r_double(n) / std::tgamma(0.8 * n + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("regime and argument checks") {
  CHECK_THROWS_AS(moment_recursion(Param::exact(3, 4), 5), RegimeError);
  CHECK_THROWS_AS(moment_recursion(Param::exact(1, 2), 5), RegimeError);
  CHECK_THROWS(moment_recursion(Param::exact(4, 5), 0));
  const auto t = moment_recursion(Param::exact(4, 5), 10);
  CHECK_THROWS_AS(charfun_series_w(t, 0.75, 10), DomainError);
  CHECK_NOTHROW(charfun_series_w(t, 0.3, 10));
  CHECK_THROWS_AS(series_coefficients_general_d(2, 0.6, 5), RegimeError);
}

TEST_CASE("moment bound check") {
  // Attained with equality at p = 1.
  const auto one = verify_moment_bound(moment_recursion(Param::exact(1, 1), 30));
  CHECK(one.holds);
  for (double m : one.log_margin) CHECK(m == doctest::Approx(0.0).epsilon(1e-12));
  // Below p = 1 the second moment already exceeds (p/(2p-1)) 2!.
  for (const char* p : {"0.76", "0.8", "0.9"}) {
    const auto rep = verify_moment_bound(moment_recursion(Param::parse(p), 10));
    CHECK_FALSE(rep.holds);
    CHECK(rep.log_margin[0] >= 0.0);
    CHECK(rep.log_margin[1] < 0.0);
  }
}

TEST_CASE("series at p = 1") {
  const auto t = moment_recursion(Param::exact(1, 1), 200);
  for (double x : {-0.6, -0.1, 0.0, 0.25, 0.5}) {
    const auto w = charfun_series_w(t, x, 200);
    CHECK(std::abs(w.value - 1.0 / std::complex<double>(1.0, -x)) < 1e-12);
    const auto y = charfun_series_y(t, x * 4, 60);
    CHECK(std::abs(y.value - std::polar(1.0, x * 4)) < 1e-12);
  }
}

TEST_CASE("general-d coefficients reduce to the moments in d = 1") {
  const auto t = moment_recursion(Param::exact(9, 10), 12);
  const auto c = series_coefficients_general_d(1, 0.9, 12);
  std::complex<double> ipow = 1.0;
  double fact = 1.0;
  for (int k = 0; k <= 12; ++k) {
    if (k > 0) fact *= k;
    const auto expect = t.r_double(k) / fact * ipow;
    CHECK(std::abs(c[std::size_t(k)] - expect) < 1e-9 * std::max(1.0, std::abs(expect)));
    ipow *= std::complex<double>(0.0, 1.0);
  }
  const auto c2 = series_coefficients_general_d(2, 0.9, 6);
  CHECK(std::abs(c2[0] - 1.0) < 1e-15);
  CHECK(std::abs(eval_series(c2, 0.0) - 1.0) < 1e-15);
}
