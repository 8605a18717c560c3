#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <map>

#include "merw/coupling.hpp"
#include "merw/errors.hpp"
#include "merw/ks.hpp"
#include "merw/stats.hpp"

using namespace merw;

namespace {

WalkParams walk(int d, const char* p, const char* q = nullptr) {
  WalkParams w;
  w.d = d;
  w.p = Param::parse(p);
  if (q) w.q = Param::parse(q);
  return w;
}

using Law = std::map<std::vector<std::int64_t>, double>;
using DistFn = std::function<StepDistribution(const WalkState&)>;

Law enumerate_law(int d, int n, const DistFn& dist_fn) {
  Law law;
  std::function<void(const WalkState&, double)> rec = [&](const WalkState& s, double prob) {
    if (s.n == n) {
      law[s.position] += prob;
      return;
    }
    const auto dist = dist_fn(s);
    for (int k = 0; k < 2 * d; ++k) {
      if (dist.probs[std::size_t(k)] == 0.0) continue;
      WalkState t = s;
      t.apply(k);
      rec(t, prob * dist.probs[std::size_t(k)]);
    }
  };
  rec(WalkState::initial(d), 1.0);
  return law;
}

// Pearson test of observed final positions against an exact law; cells with
// expected count below 5 are pooled.
double chi_square_p(const Law& law, const std::map<std::vector<std::int64_t>, double>& counts,
                    double total) {
  std::vector<double> obs, exp;
  double pool_o = 0, pool_e = 0;
  for (const auto& [x, prob] : law) {
    const auto it = counts.find(x);
    const double o = it == counts.end() ? 0.0 : it->second;
    if (prob * total < 5.0) {
      pool_o += o;
      pool_e += prob * total;
    } else {
      obs.push_back(o);
      exp.push_back(prob * total);
    }
  }
  if (pool_e > 0) {
    obs.push_back(pool_o);
    exp.push_back(pool_e);
  }
  return chi_square_test(obs, exp).p_value;
}

}  // namespace

TEST_CASE("coupled sign rule") {
  CHECK(coupled_sign(0, 0.3, 0.49) == 1);
  CHECK(coupled_sign(0, 0.3, 0.5) == -1);
  CHECK(coupled_sign(2, 0.1, 0.69) == 1);
  CHECK(coupled_sign(2, 0.1, 0.71) == -1);
  CHECK(coupled_sign(-2, 0.1, 0.69) == -1);
  const std::vector<double> c{0.0, 0.4, 0.6};
  CHECK(choose_axis(c, 0.0) == 1);
  CHECK(choose_axis(c, 0.4) == 2);
}

TEST_CASE("coupled MERW and d-ERW have the right marginals") {
  const int n = 5;
  const std::size_t reps = 30000;
  const auto w = walk(2, "0.7");
  std::map<std::vector<std::int64_t>, double> merw_counts, derw_counts;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto b = couple_merw_derw(w, {Param::parse("0.8")}, n, 11, std::uint32_t(r));
    merw_counts[b.merw.final_state.position] += 1;
    derw_counts[b.derw[0].final_state.position] += 1;
  }
  const auto merw_law =
      enumerate_law(2, n, [&](const WalkState& s) { return merw_step_distribution(s, w); });
  const auto wq = walk(2, "0.7", "0.8");
  const auto derw_law =
      enumerate_law(2, n, [&](const WalkState& s) { return derw_step_distribution(s, wq); });
  CHECK(chi_square_p(merw_law, merw_counts, double(reps)) > 1e-3);
  CHECK(chi_square_p(derw_law, derw_counts, double(reps)) > 1e-3);
}

TEST_CASE("coupled ERW pair marginals") {
  const int n = 8;
  const std::size_t reps = 30000;
  std::map<std::vector<std::int64_t>, double> lo, hi;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto pr = couple_erw_pair(Param::parse("0.2"), Param::parse("0.9"), n, 5, std::uint32_t(r));
    lo[pr.lower.final_state.position] += 1;
    hi[pr.upper.final_state.position] += 1;
    REQUIRE(pr.report.holds());
  }
  for (const auto& [p, counts] : {std::pair{"0.2", &lo}, std::pair{"0.9", &hi}}) {
    const auto w = walk(1, p);
    const auto law =
        enumerate_law(1, n, [&](const WalkState& s) { return merw_step_distribution(s, w); });
    CHECK(chi_square_p(law, *counts, double(reps)) > 1e-3);
  }
}

TEST_CASE("ERW pair dominance and argument checks") {
  for (std::uint32_t s = 0; s < 20; ++s) {
    const auto pr = couple_erw_pair(Param::parse("1/2"), Param::parse("3/4"), 5000, 1, s);
    CHECK(pr.report.regime == DominanceRegime::erw_pair);
    CHECK(pr.report.violation_count == 0);
  }
  CHECK_THROWS_AS(couple_erw_pair(Param::parse("0.8"), Param::parse("0.2"), 10, 1),
                  ValidationError);
}

TEST_CASE("regime classification") {
  auto regime = [](int d, const char* p, const char* q1, const char* q2) {
    const auto b = couple_merw_derw(walk(d, p), {Param::parse(q1), Param::parse(q2)}, 50, 1);
    return verify_dominance(b, 0, 1);
  };
  CHECK(regime(3, "1/6", "0", "1/2").regime == DominanceRegime::merw_sandwich_low_p);
  CHECK(regime(2, "0.9", "1/2", "27/28").regime == DominanceRegime::merw_sandwich_high_p);
  CHECK(regime(2, "1/2", "0.2", "0.8").regime == DominanceRegime::derw_monotone);
  const auto nc = regime(2, "1/2", "0.8", "0.2");
  CHECK(nc.regime == DominanceRegime::not_covered);
  CHECK_FALSE(nc.holds());
  CHECK(to_string(DominanceRegime::not_covered) == "not covered by paper");
}

TEST_CASE("sandwich holds over many seeds") {
  for (std::uint32_t s = 0; s < 10; ++s) {
    const auto b = couple_merw_derw(walk(2, "0.9"), {Param::parse("1/2"), Param::parse("27/28")},
                                    3000, 4, s);
    CHECK(verify_dominance(b).holds());
  }
}

TEST_CASE("d-ERW decomposes into per-axis walks") {
  const auto b = couple_merw_derw(walk(3, "0.4"), {Param::parse("0.3")}, 2000, 8);
  const auto axes = decompose_derw(b, 0);
  REQUIRE(axes.size() == 3);
  std::size_t total = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    total += axes[i].size();
    CHECK(std::int64_t(axes[i].size()) == b.derw[0].final_state.axis_counts[i]);
    if (!axes[i].empty()) CHECK(axes[i].back() == b.derw[0].final_state.position[i]);
    // the d-ERW and the MERW share axis choices
    CHECK(b.merw.final_state.axis_counts[i] == b.derw[0].final_state.axis_counts[i]);
  }
  CHECK(total == 2000);
  CHECK(b.b_counts.size() == 2000 * 3);
}
