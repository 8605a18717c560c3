#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "merw/ensemble.hpp"
#include "merw/errors.hpp"
#include "merw/ks.hpp"
#include "merw/stats.hpp"

using namespace merw;

namespace {
WalkParams wp(int d, const char* p) { return WalkParams{d, Param::parse(p)}; }

// m_n = gamma_n sum_{i<=n} 1/gamma_i with gamma_n = prod_{i<n} (1 + 2a/i).
double msd_product_form(int d, double p, std::int64_t n) {
  const double a = (2.0 * d * p - 1.0) / (2.0 * d - 1.0);
  double log_gamma = 0.0;
  double sum = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    if (i > 1) log_gamma += std::log1p(2.0 * a / double(i - 1));
    sum += std::exp(-log_gamma);
  }
  return std::exp(log_gamma) * sum;
}
}  // namespace

TEST_CASE("msd recursion against the product form") {
  for (auto [d, p] : {std::pair{1, "0.3"}, std::pair{2, "0.5"}, std::pair{3, "0.9"}}) {
    const auto m = msd_exact(wp(d, p), 2000);
    CHECK(m[0] == 0.0);
    CHECK(m[1] == 1.0);
    for (std::int64_t n : {2, 3, 10, 500, 2000}) {
      const double ref = msd_product_form(d, Param::parse(p).value(), n);
      CHECK(m[std::size_t(n)] == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("msd long-time behaviour") {
  // d = 2, p = 1/2: a = 1/3, m_n / n -> 3.
  const auto m = msd_exact(wp(2, "1/2"), 1000000);
  double prev_err = INFINITY;
  for (std::int64_t n : {1000, 10000, 100000, 1000000}) {
    const double err = std::abs(m[std::size_t(n)] / double(n) - 3.0);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(std::abs(m[1000000] / 1e6 / 3.0 - 1.0) < 0.01);
  // d = 2, p = 5/8: a = 1/2, m_n / (n log n) -> 1.
  const auto c = msd_exact(wp(2, "5/8"), 1000000);
  CHECK(std::abs(c[1000000] / (1e6 * std::log(1e6)) - 1.0) < 0.05);
}

TEST_CASE("msd_empirical agrees with the exact curve") {
  const auto ens = run_ensemble(wp(2, "0.7"), {1, 10, 100, 500}, 400, 11, 1);
  const auto rep = msd_empirical(ens);
  CHECK(rep.pass);
  CHECK(rep.points.front().value == 1.0);
  const auto tiny = run_ensemble(wp(2, "0.7"), {10}, 10, 11, 1);
  CHECK_THROWS(msd_empirical(tiny));
}

TEST_CASE("ks statistic has the Kolmogorov median") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int R = 400;
  std::vector<double> stats;
  for (int t = 0; t < 301; ++t) {
    std::vector<double> x(R);
    for (auto& v : x) v = u(gen);
    stats.push_back(ks_one_sample(x, [](double z) { return std::clamp(z, 0.0, 1.0); }));
  }
  std::nth_element(stats.begin(), stats.begin() + 150, stats.end());
  CHECK(stats[150] * std::sqrt(double(R)) == doctest::Approx(0.8276).epsilon(0.08));
  CHECK(ks_one_sample({0.5}, [](double z) { return std::clamp(z, 0.0, 1.0); }) == 0.5);
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(ks_two_sample({1, 2}, {3, 4}) == 1.0);
}

TEST_CASE("martingale weights") {
  MartingaleWeights gen(wp(1, "0.8"));  // a = 0.6
  CHECK(gen.start_index() == 1);
  CHECK(gen.a_n(1) == doctest::Approx(1.0));
  double norm2 = 0.0;
  double gam = 1.0;
  for (std::int64_t n = 1; n <= 50; ++n) {
    if (n > 1) gam *= 1.0 + 2.0 * 0.6 / double(n - 1);
    CHECK(gen.a_n(n + 1) / gen.a_n(n) == doctest::Approx(double(n) / (n + 0.6)));
    CHECK(gen.gamma_n(n) == doctest::Approx(gam));
    norm2 += gen.a_n(n) * gen.a_n(n);
    CHECK(gen.a_norm2(n) == doctest::Approx(norm2));
  }
  MartingaleWeights half(wp(1, "1/4"));
  CHECK(half.a() == -0.5);
  CHECK(half.start_index() == 2);
  MartingaleWeights one(wp(1, "0"));
  CHECK(one.start_index() == 3);
  for (std::int64_t n = 3; n < 10; ++n) CHECK(one.a_n(n) == double(n - 1));
}

TEST_CASE("martingale residuals vanish in mean") {
  const auto ens = run_ensemble(wp(2, "0.7"), {1, 2, 3, 4, 50, 200}, 2000, 3, 1);
  const auto rep = martingale_residuals(ens);
  CHECK(rep.pass);
}

TEST_CASE("path statistics from a trajectory match streaming") {
  const auto params = wp(2, "0.4");
  PathStatsConfig cfg;
  cfg.checkpoints = {10, 100, 1000};
  cfg.nu = 0.2;
  cfg.lil = true;
  cfg.direction = true;
  const auto streamed =
      observe_replicas<PathStats>(params, 1000, 3, 17, 1, [&] { return PathStats(cfg); });
  for (std::uint32_t r = 0; r < 3; ++r) {
    const auto t = simulate(params, 1000, 17, r);
    const auto ps = path_stats(t, cfg);
    CHECK(ps.zeros == streamed[r].zeros);
    CHECK(ps.escape_count == streamed[r].escape_count);
    CHECK(ps.last_escape == streamed[r].last_escape);
    CHECK(ps.sign_changes == streamed[r].sign_changes);
    CHECK(count_zeros(t) == ps.zeros.back());
  }
}

TEST_CASE("zeros and exits") {
  const auto t = simulate(wp(2, "1"), 500, 1, 0);
  CHECK(count_zeros(t) == 0);
  CHECK(exit_time(t, 1).value() == 1);
  CHECK(exit_time(t, 400).value() == 400);
  CHECK_FALSE(exit_time(t, 501).has_value());
  const auto e = exit_time(wp(1, "0.5"), 1, 9, 0);
  CHECK(e.zeta == 1);
  CHECK_FALSE(e.censored);
  const auto capped = exit_time(wp(1, "0.9"), 200, 9, 0, 100);
  CHECK(capped.censored);
}

TEST_CASE("exact one-dimensional laws") {
  const auto p = Param::parse("0.7");
  const std::vector<std::int64_t> ns{1, 2, 7, 40};
  const auto laws = erw_exact_laws(p, ns);
  const auto mean = mean_exact_1d(p, 40);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto n = ns[i];
    REQUIRE(laws[i].size() == std::size_t(n + 1));
    double total = 0.0, m = 0.0;
    for (std::size_t k = 0; k < laws[i].size(); ++k) {
      total += laws[i][k];
      m += double(-n + 2 * std::int64_t(k)) * laws[i][k];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m == doctest::Approx(mean[std::size_t(n)]).epsilon(1e-10));
  }
  CHECK(laws[0][1] == 1.0);
}

TEST_CASE("normalised cdf distance") {
  CHECK_THROWS_AS(normalize_position(wp(1, "0.8"), 10, 2), RegimeError);
  CHECK_THROWS_AS(normalize_position(wp(2, "0.5"), 10, 2), RegimeError);
  CHECK(normalize_position(wp(1, "0.5"), 100, 10) == doctest::Approx(1.0));
  const auto params = wp(1, "0.5");
  const auto laws = erw_exact_laws(params.p, {1, 100, 1000});
  // n = 1: S_1 = 1 with the normal cdf 0.841 at the atom.
  CHECK(normalized_cdf_distance_exact(params, 1, laws[0]) == doctest::Approx(normal_cdf(1.0)));
  const double d100 = normalized_cdf_distance_exact(params, 100, laws[1]);
  const double d1000 = normalized_cdf_distance_exact(params, 1000, laws[2]);
  CHECK(d1000 < d100);
}

TEST_CASE("drift probe regime labels") {
  const auto in = lyapunov_drift_probe(wp(2, "0.5"), 100, 400, 4.0, 20, 1, 1);
  CHECK(in.regime == "a<1/2");
  const auto out = lyapunov_drift_probe(wp(2, "1"), 100, 400, 4.0, 20, 1, 1);
  CHECK(out.regime == "out of regime");
  CHECK_THROWS_AS(lyapunov_drift_probe(wp(3, "0.5"), 100, 400, 4.0, 20, 1, 1), ValidationError);
}

TEST_CASE("tree_sum and mean_se") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(tree_sum(v) == 500500.0);
  const auto ms = mean_se(v);
  CHECK(ms.mean == 500.5);
  CHECK(ms.count == 1000);
  CHECK(ms.se == doctest::Approx(std::sqrt(1000.0 * 1001.0 / 12.0) / std::sqrt(1000.0)).epsilon(1e-3));
}
