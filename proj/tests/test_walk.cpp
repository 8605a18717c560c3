#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>

#include "merw/errors.hpp"
#include "merw/stats.hpp"
#include "merw/walk.hpp"

using namespace merw;

namespace {

WalkParams walk(int d, const char* p) {
  WalkParams w;
  w.d = d;
  w.p = Param::parse(p);
  return w;
}

// Law of S_n by summing over every step sequence.
std::map<std::vector<std::int64_t>, double> enumerate_law(const WalkParams& w, int n) {
  std::map<std::vector<std::int64_t>, double> law;
  std::function<void(const WalkState&, double)> rec = [&](const WalkState& s, double prob) {
    if (s.n == n) {
      law[s.position] += prob;
      return;
    }
    const auto dist = merw_step_distribution(s, w);
    for (int k = 0; k < 2 * w.d; ++k) {
      if (dist.probs[std::size_t(k)] == 0.0) continue;
      WalkState t = s;
      t.apply(k);
      rec(t, prob * dist.probs[std::size_t(k)]);
    }
  };
  rec(WalkState::initial(w.d), 1.0);
  return law;
}

}  // namespace

TEST_CASE("initial state and bookkeeping") {
  const auto s = WalkState::initial(3, -2);
  CHECK(s.n == 1);
  CHECK(s.position == std::vector<std::int64_t>{0, -1, 0});
  CHECK(s.dir_counts == std::vector<std::int64_t>{0, 0, 0, 1, 0, 0});
  CHECK(s.axis_counts == std::vector<std::int64_t>{0, 1, 0});
  CHECK_NOTHROW(s.validate());
  WalkState bad = s;
  bad.position[0] = 4;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(direction_of(1) == 0);
  CHECK(direction_of(-1) == 1);
  CHECK(direction_of(-3) == 5);
  CHECK(axis_of(5) == 2);
  CHECK(sign_of(4) == 1);
}

TEST_CASE("step distribution") {
  const auto w = walk(2, "0.7");
  WalkState s = WalkState::initial(2);
  s.apply(direction_of(2));
  s.apply(direction_of(1));
  const auto dist = merw_step_distribution(s, w);
  CHECK_NOTHROW(dist.validate());
  const double a = (4 * 0.7 - 1) / 3.0, beta = 0.3 / 3.0;
  CHECK(dist.probs[0] == doctest::Approx(a * 2 / 3 + beta));
  CHECK(dist.probs[1] == doctest::Approx(beta));
  CHECK(dist.probs[2] == doctest::Approx(a / 3 + beta));
  const auto c = merw_axis_probabilities(s, w);
  CHECK(c[0] == doctest::Approx(dist.probs[0] + dist.probs[1]));
  const auto ce = merw_axis_probabilities_exact(s, w);
  CHECK(ce[0] + ce[1] == Rational(1));
  const auto cm = conditional_moments(s, w);
  CHECK(cm.drift == doctest::Approx(a * double(s.norm2()) / 3.0));
}

TEST_CASE("p = 0 keeps masses nonnegative") {
  for (int d = 1; d <= 4; ++d) {
    const auto w = walk(d, "0");
    MerwStepper st(w, 3, 0);
    for (int i = 0; i < 2000; ++i) {
      CHECK_NOTHROW(merw_step_distribution(st.state(), w).validate());
      st.step();
    }
  }
}

TEST_CASE("derw distribution") {
  WalkParams w = walk(2, "0.6");
  w.q = Param::parse("0.8");
  WalkState s = WalkState::initial(2);
  const auto dist = derw_step_distribution(s, w);
  CHECK_NOTHROW(dist.validate());
  const auto c = merw_axis_probabilities(s, w);
  // Unvisited axis: fair sign.
  CHECK(dist.probs[2] == doctest::Approx(c[1] / 2));
  CHECK(dist.probs[3] == doctest::Approx(c[1] / 2));
  // Visited axis: x = 1, b = 1.
  CHECK(dist.probs[0] == doctest::Approx(c[0] * (0.5 + 0.6 / 2)));
}

TEST_CASE("inverse cdf uses half-open intervals") {
  const std::vector<double> half{0.5, 0.5};
  CHECK(sample_direction(half, 0.0) == 0);
  CHECK(sample_direction(half, 0.4999999) == 0);
  CHECK(sample_direction(half, 0.5) == 1);
  const std::vector<double> zero_first{0.0, 1.0};
  CHECK(sample_direction(zero_first, 0.0) == 1);
  const std::vector<double> short_sum{0.3, 0.3, 0.0};
  CHECK(sample_direction(short_sum, 0.9999) == 1);
}

TEST_CASE("stepper equals repeated advance") {
  for (const auto& w : {walk(1, "0.3"), walk(2, "0.7"), walk(3, "1/6"), walk(2, "1")}) {
    MerwStepper st(w, 99, 5);
    WalkState s = WalkState::initial(w.d);
    const CounterRng rng(99, 5, 0);
    for (int i = 0; i < 3000; ++i) {
      const double u = rng.uniform(static_cast<std::uint64_t>(s.n - 1));
      s = advance(s, merw_step_distribution(s, w), u);
      st.step();
      REQUIRE(st.state() == s);
    }
  }
}

TEST_CASE("p = 1 repeats the first step") {
  const auto t = simulate(walk(2, "1"), 500, 1, 0, 1);
  CHECK(t.final_state.position == std::vector<std::int64_t>{500, 0});
}

TEST_CASE("simulate records stride multiples and the end") {
  const auto w = walk(2, "0.5");
  const auto t = simulate(w, 1005, 3, 2, 100);
  REQUIRE(t.times.size() == 12);
  CHECK(t.times.front() == 1);
  CHECK(t.times[1] == 100);
  CHECK(t.times.back() == 1005);
  MerwStepper st(w, 3, 2);
  while (st.state().n < 500) st.step();
  CHECK(std::vector<std::int64_t>(t.position(5).begin(), t.position(5).end()) ==
        st.state().position);
  const auto t1 = simulate(w, 200, 3, 2, 1);
  CHECK(t1.steps.size() == 200);
}

TEST_CASE("exact one-dimensional laws match path enumeration") {
  for (const char* p : {"0.2", "1/2", "3/4", "0.9"}) {
    const auto w = walk(1, p);
    const int n = 10;
    const auto law = enumerate_law(w, n);
    const auto dp = erw_exact_laws(w.p, {n});
    double total = 0.0;
    for (std::size_t u = 0; u < dp[0].size(); ++u) {
      const std::int64_t s = 2 * std::int64_t(u) - n;
      const auto it = law.find({s});
      const double e = it == law.end() ? 0.0 : it->second;
      CHECK(dp[0][u] == doctest::Approx(e).epsilon(1e-12));
      total += dp[0][u];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("second moment recursion matches enumeration") {
  for (const auto& w : {walk(1, "0.3"), walk(2, "0.7"), walk(3, "0.1")}) {
    const int n = w.d == 3 ? 5 : 7;
    const auto law = enumerate_law(w, n);
    double m2 = 0.0, mass = 0.0;
    for (const auto& [x, prob] : law) {
      double r2 = 0.0;
      for (auto v : x) r2 += double(v * v);
      m2 += prob * r2;
      mass += prob;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(msd_exact(w, n)[std::size_t(n)] == doctest::Approx(m2).epsilon(1e-12));
  }
}
