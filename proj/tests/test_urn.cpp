#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>

#include "merw/errors.hpp"
#include "merw/ks.hpp"
#include "merw/urn.hpp"
#include "merw/walk.hpp"

using namespace merw;

namespace {

WalkParams walk(int d, const char* p) {
  WalkParams w;
  w.d = d;
  w.p = Param::parse(p);
  return w;
}

// Composition law after `events` draws, by brute force over every
// (drawn colour, added colour) sequence.
std::map<std::vector<std::int64_t>, double> urn_law(int d, double p, int events) {
  std::map<std::vector<std::int64_t>, double> law;
  const int colours = 2 * d;
  std::function<void(std::vector<std::int64_t>&, std::int64_t, int, double)> rec =
      [&](std::vector<std::int64_t>& c, std::int64_t total, int left, double prob) {
        if (left == 0) {
          law[c] += prob;
          return;
        }
        for (int drawn = 0; drawn < colours; ++drawn) {
          if (c[std::size_t(drawn)] == 0) continue;
          const double pd = prob * double(c[std::size_t(drawn)]) / double(total);
          for (int added = 0; added < colours; ++added) {
            const double pa = added == drawn ? p : (1.0 - p) / (colours - 1);
            if (pa == 0.0) continue;
            ++c[std::size_t(added)];
            rec(c, total + 1, left - 1, pd * pa);
            --c[std::size_t(added)];
          }
        }
      };
  std::vector<std::int64_t> c(std::size_t(colours), 0);
  c[0] = 1;
  rec(c, 1, events, 1.0);
  return law;
}

}  // namespace

TEST_CASE("urn composition N_4 matches brute force and the MERW direction counts") {
  for (const auto& [d, p] : {std::pair{1, "0.3"}, std::pair{2, "0.7"}}) {
    const auto w = walk(d, p);
    const auto law = urn_law(d, w.p.value(), 3);
    const std::size_t reps = 40000;
    std::map<std::vector<std::int64_t>, double> counts;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto seq = simulate_urn_discrete(w, 3, 21, std::uint32_t(r));
      const auto row = seq.row(3);
      counts[std::vector<std::int64_t>(row.begin(), row.end())] += 1;
    }
    std::vector<double> obs, exp;
    double mass = 0;
    for (const auto& [c, prob] : law) {
      obs.push_back(counts.count(c) ? counts[c] : 0.0);
      exp.push_back(prob * double(reps));
      mass += prob;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(chi_square_test(obs, exp).p_value > 1e-3);

    // The urn after n-1 events has the law of the MERW direction counts N_n.
    std::map<std::vector<std::int64_t>, double> merw;
    std::function<void(const WalkState&, double)> rec = [&](const WalkState& s, double prob) {
      if (s.n == 4) {
        merw[s.dir_counts] += prob;
        return;
      }
      const auto dist = merw_step_distribution(s, w);
      for (int k = 0; k < 2 * d; ++k) {
        if (dist.probs[std::size_t(k)] == 0.0) continue;
        WalkState t = s;
        t.apply(k);
        rec(t, prob * dist.probs[std::size_t(k)]);
      }
    };
    rec(WalkState::initial(d), 1.0);
    REQUIRE(merw.size() == law.size());
    for (const auto& [c, prob] : law) CHECK(merw[c] == doctest::Approx(prob).epsilon(1e-12));
  }
}

TEST_CASE("continuous skeleton equals the discrete urn") {
  for (const auto& w : {walk(1, "0.9"), walk(3, "0.2")}) {
    for (std::uint32_t s = 0; s < 5; ++s) {
      const auto run = simulate_urn_continuous(w, 3000, 77, s);
      const auto disc = simulate_urn_discrete(w, 3000, 77, s);
      CHECK(run.compositions.counts == disc.counts);
      CHECK(run.jump_times.front() == 0.0);
      CHECK(run.horizon() == 3000);
      CHECK(std::is_sorted(run.jump_times.begin(), run.jump_times.end()));
    }
  }
}

TEST_CASE("urn position is the walk position") {
  UrnSkeleton u(walk(2, "0.6"), 5, 0);
  for (int i = 0; i < 100; ++i) u.step();
  const auto c = u.counts();
  const auto pos = u.position();
  CHECK(pos[0] == c[0] - c[1]);
  CHECK(pos[1] == c[2] - c[3]);
  CHECK(u.total() == 101);
  CHECK(u.events() == 100);
}

TEST_CASE("limit estimators") {
  const auto sup = walk(1, "0.9");
  const auto run = simulate_urn_continuous(sup, 1000, 3, 0);
  const auto est = estimate_limits(run, sup);
  CHECK(est.horizon == 1000);
  CHECK(est.xi_hat == doctest::Approx(1001.0 * std::exp(-run.jump_times.back())));
  const double a = 0.8;
  const auto last = run.compositions.row(1000);
  CHECK(est.W()[0] ==
        doctest::Approx(double(last[0] - last[1]) * std::exp(-a * run.jump_times.back())));
  CHECK(est.Y()[0] == doctest::Approx(double(last[0] - last[1]) / std::pow(1001.0, a)));
  CHECK(est.w() == doctest::Approx(est.W()[0]));

  const auto diff = walk(2, "0.5");
  const auto e2 = estimate_limits(simulate_urn_continuous(diff, 100, 3, 0), diff);
  CHECK_THROWS_AS(e2.W(), RegimeError);
  CHECK_THROWS_AS(e2.w(), RegimeError);
  CHECK_THROWS_AS(sample_w(diff, 10, 2, 1, 1), RegimeError);
}

TEST_CASE("checkpointed estimates agree with the full run") {
  const auto w = walk(2, "0.8");
  const std::vector<std::int64_t> cps{10, 100, 1000};
  const auto path = urn_checkpoints(w, 1000, cps, 9, 4);
  const auto run = simulate_urn_continuous(w, 1000, 9, 4);
  REQUIRE(path.size() == 3);
  const auto full = estimate_limits(run, w);
  CHECK(path.back().xi_hat == full.xi_hat);
  CHECK(*path.back().w_hat == *full.w_hat);
}

TEST_CASE("scaled waiting times are Exp(1)") {
  const auto w = walk(2, "0.4");
  std::vector<double> z;
  for (std::uint32_t r = 0; r < 4000; ++r) {
    UrnClock c(w, 13, r);
    double prev = 0.0;
    for (int k = 0; k < 5; ++k) {
      c.step();
      if (k == 4) z.push_back(5.0 * (c.time() - prev));
      prev = c.time();
    }
  }
  CHECK(ks_one_sample(z, exp1_cdf) < 1.95 / std::sqrt(4000.0));
}

TEST_CASE("sampling does not depend on the worker count") {
  const auto w = walk(1, "0.9");
  const auto a = sample_w(w, 500, 64, 5, 1);
  const auto b = sample_w(w, 500, 64, 5, 4);
  CHECK(a == b);
}

TEST_CASE("distributional fixed point") {
  const auto w = walk(1, "0.9");
  const auto sample = sample_w(w, 3000, 2000, 17, 2);
  const double dist = fixed_point_check(sample, w, 17);
  CHECK(dist < two_sample_ks_threshold(sample.size(), sample.size()));
  CHECK(two_sample_ks_threshold(100, 100) == doctest::Approx(1.9495 * std::sqrt(0.02)).epsilon(1e-3));
}
