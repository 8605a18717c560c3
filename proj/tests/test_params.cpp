#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "merw/errors.hpp"
#include "merw/params.hpp"

using namespace merw;

TEST_CASE("rational parsing keeps exact values") {
  CHECK(Param::parse("5/8").exact() == Rational(5, 8));
  CHECK(Param::parse("0.625").exact() == Rational(5, 8));
  CHECK(Param::parse("1").exact() == Rational(1));
  CHECK(Param::parse("10/16").exact() == Rational(5, 8));
  CHECK(Param::from_decimal(0.9).exact() == Rational(9, 10));
  CHECK_FALSE(Param::parse("6.25e-1").is_exact());
  CHECK(Param::parse("6.25e-1").value() == 0.625);
  CHECK(Param::parse("7/12").to_string() == "7/12");
}

TEST_CASE("rational arithmetic") {
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) - Rational(3, 4) == Rational(-1, 4));
  CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
  CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("derived constants") {
  auto dc = [](int d, const char* p) {
    WalkParams w;
    w.d = d;
    w.p = Param::parse(p);
    return derived_constants(w);
  };
  CHECK(dc(2, "5/8").a_exact == Rational(1, 2));
  CHECK(dc(1, "1/2").p_d_exact == Rational(3, 4));
  CHECK(dc(2, "1/2").p_d_exact == Rational(5, 8));
  CHECK(dc(3, "1/2").p_d_exact == Rational(7, 12));
  CHECK(dc(2, "5/8").regime == Regime::critical);
  CHECK(dc(2, "0.6").regime == Regime::diffusive);
  CHECK(dc(2, "0.7").regime == Regime::superdiffusive);
  CHECK(dc(1, "1").a_exact == Rational(1));
  CHECK(dc(1, "0").a_exact == Rational(-1));
  CHECK(dc(3, "1/6").a_exact == Rational(0));
  CHECK(dc(2, "0.3").a == doctest::Approx((4 * 0.3 - 1) / 3));
}

TEST_CASE("validation") {
  WalkParams w;
  w.p = Param::parse("1/2");
  w.d = 0;
  CHECK_THROWS_AS(w.validate(), ValidationError);
  w.d = 2;
  w.initial_step = 3;
  CHECK_THROWS_AS(w.validate(), ValidationError);
  w.initial_step = -2;
  CHECK_NOTHROW(w.validate());
  w.p = Param::approx(1.5);
  CHECK_THROWS_AS(w.validate(), ValidationError);
}
