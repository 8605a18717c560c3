#include "merw/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "merw/charfun.hpp"
#include "merw/coupling.hpp"
#include "merw/ensemble.hpp"
#include "merw/errors.hpp"
#include "merw/ks.hpp"
#include "merw/moments.hpp"
#include "merw/stats.hpp"
#include "merw/urn.hpp"

namespace merw {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string g4(double v) { return fmt("%.4g", v); }

// Seeds for the sub-experiments of one criterion.
std::uint64_t sub_seed(std::uint64_t master, int id, int k) {
  std::uint64_t z = master ^ (static_cast<std::uint64_t>(id) << 40) ^
                    (static_cast<std::uint64_t>(k) << 20);
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

WalkParams walk(int d, std::string_view p) {
  WalkParams w;
  w.d = d;
  w.p = Param::parse(p);
  return w;
}

std::string label(const WalkParams& w) {
  return "d" + std::to_string(w.d) + "_p" + w.p.to_string();
}

// Prefixes every file name with the criterion directory.
class Sink {
 public:
  Sink(OutputSet& out, std::string dir) : out_(out), dir_(std::move(dir)) {}
  void csv(const std::string& name, const CsvTable& t) { out_.add_csv(dir_ + "/" + name, t); }
  void json_doc(const std::string& name, const json& j) { out_.add_json(dir_ + "/" + name, j); }

 private:
  OutputSet& out_;
  std::string dir_;
};

struct Ctx {
  int id;
  std::uint64_t seed;
  int workers;
  Sink sink;
};

CriterionResult finish(Ctx& c, std::string_view regime, bool pass, std::string summary,
                       json details) {
  const auto& info = acceptance_criteria()[static_cast<std::size_t>(c.id - 1)];
  c.sink.json_doc("verdict.json", verdict(info.name, regime, pass, details));
  CriterionResult r;
  r.id = c.id;
  r.name = std::string(info.name);
  r.pass = pass;
  r.summary = std::move(summary);
  r.details = std::move(details);
  return r;
}

std::vector<std::int64_t> log_grid(std::int64_t n_max) {
  std::vector<std::int64_t> g;
  for (std::int64_t dec = 1; dec <= n_max; dec *= 10) {
    for (std::int64_t m : {1, 2, 5}) {
      if (m * dec <= n_max) g.push_back(m * dec);
    }
  }
  if (g.back() != n_max) g.push_back(n_max);
  return g;
}

// ------------------------------------------------------------------- 1 msd

CriterionResult c_msd(Ctx& c) {
  const std::vector<WalkParams> sets{walk(1, "1/2"), walk(2, "1/2"), walk(2, "5/8"),
                                     walk(3, "0.8")};
  const std::size_t R = 1000;
  const std::int64_t n = 10000;
  bool pass = true;
  std::size_t flagged = 0;
  double worst_z = 0.0;
  json details = json::array();
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto ens = run_ensemble(sets[k], log_grid(n), R, sub_seed(c.seed, c.id, int(k)),
                                  c.workers);
    const auto rep = msd_empirical(ens);
    CsvTable t({"n", "value", "stderr", "exact", "flagged"});
    for (const auto& pt : rep.points) {
      t.row({cell(pt.n), cell(pt.value), cell(pt.se), cell(pt.reference),
             cell(pt.flagged ? 1 : 0)});
      if (pt.se > 0) worst_z = std::max(worst_z, std::abs(pt.value - pt.reference) / pt.se);
      flagged += pt.flagged ? 1 : 0;
    }
    c.sink.csv("msd_" + label(sets[k]) + ".csv", t);
    details.push_back({{"params", to_json(sets[k])}, {"pass", rep.pass}});
    pass = pass && rep.pass;
  }
  return finish(c, "all", pass,
                std::to_string(flagged) + " flagged checkpoints, max |z| = " + g4(worst_z),
                {{"replicas", R}, {"n", n}, {"sets", details}, {"max_abs_z", worst_z}});
}

// ------------------------------------------------------------- 2 constants

CriterionResult c_constants(Ctx& c) {
  bool pass = true;
  json rows = json::array();
  const auto k = derived_constants(walk(2, "5/8"));
  const bool a_ok = k.a_exact && *k.a_exact == Rational(1, 2);
  pass = pass && a_ok;
  rows.push_back({{"quantity", "a(2,5/8)"},
                  {"value", k.a_exact ? k.a_exact->to_string() : "inexact"},
                  {"expected", "1/2"},
                  {"pass", a_ok}});
  const Rational expected[] = {Rational(3, 4), Rational(5, 8), Rational(7, 12)};
  for (int d = 1; d <= 3; ++d) {
    const auto dc = derived_constants(walk(d, "1/2"));
    const bool ok = dc.p_d_exact == expected[d - 1];
    pass = pass && ok;
    rows.push_back({{"quantity", "p_" + std::to_string(d)},
                    {"value", dc.p_d_exact.to_string()},
                    {"expected", expected[d - 1].to_string()},
                    {"pass", ok}});
  }
  const bool critical = k.regime == Regime::critical;
  pass = pass && critical;
  rows.push_back({{"quantity", "regime(2,5/8)"},
                  {"value", to_string(k.regime)},
                  {"expected", "critical"},
                  {"pass", critical}});
  return finish(c, "exact", pass, pass ? "all constants exact" : "constant mismatch",
                {{"checks", rows}});
}

// -------------------------------------------------------------- 3 coupling

CriterionResult c_coupling(Ctx& c) {
  const std::int64_t n = 10000;
  const std::size_t seeds = 100;
  struct Pair {
    const char* p1;
    const char* p2;
  };
  const Pair pairs[] = {{"0", "1/2"}, {"1/4", "3/4"}, {"1/2", "3/4"},
                        {"0.3", "0.31"}, {"0.1", "0.9"}, {"3/4", "1"}};
  struct Sandwich {
    int d;
    const char* p;
    const char* q1;
    const char* q2;
    DominanceRegime regime;
  };
  const Sandwich bundles[] = {
      {3, "1/6", "0", "1/2", DominanceRegime::merw_sandwich_low_p},
      {2, "0.9", "1/2", "27/28", DominanceRegime::merw_sandwich_high_p},
      {2, "1/2", "0.2", "0.8", DominanceRegime::derw_monotone},
      {3, "0.3", "0.1", "0.9", DominanceRegime::derw_monotone},
  };
  CsvTable t({"family", "config", "seeds", "violations", "regime_ok"});
  bool pass = true;
  std::int64_t total = 0;
  json details = json::array();
  int sub = 0;
  for (const auto& pr : pairs) {
    std::vector<std::int64_t> v(seeds, 0);
    std::vector<int> regime_ok(seeds, 1);
    const auto seed = sub_seed(c.seed, c.id, sub++);
    parallel_for(seeds, c.workers, [&](std::size_t s) {
      const auto res = couple_erw_pair(Param::parse(pr.p1), Param::parse(pr.p2), n, seed,
                                       static_cast<std::uint32_t>(s));
      v[s] = res.report.violation_count;
      regime_ok[s] = res.report.regime == DominanceRegime::erw_pair;
    });
    std::int64_t sum = 0;
    for (auto x : v) sum += x;
    const bool ok = std::all_of(regime_ok.begin(), regime_ok.end(), [](int x) { return x; });
    const std::string cfg = std::string("p1=") + pr.p1 + " p2=" + pr.p2;
    t.row({"erw_pair", cfg, cell(seeds), cell(sum), cell(ok ? 1 : 0)});
    details.push_back({{"family", "erw_pair"}, {"config", cfg}, {"violations", sum}});
    total += sum;
    pass = pass && ok && sum == 0;
  }
  for (const auto& b : bundles) {
    std::vector<std::int64_t> v(seeds, 0);
    std::vector<int> regime_ok(seeds, 1);
    const auto seed = sub_seed(c.seed, c.id, sub++);
    const WalkParams w = walk(b.d, b.p);
    parallel_for(seeds, c.workers, [&](std::size_t s) {
      const auto bundle = couple_merw_derw(w, {Param::parse(b.q1), Param::parse(b.q2)}, n, seed,
                                           static_cast<std::uint32_t>(s));
      const auto rep = verify_dominance(bundle, 0, 1);
      v[s] = rep.violation_count;
      regime_ok[s] = rep.regime == b.regime;
    });
    std::int64_t sum = 0;
    for (auto x : v) sum += x;
    const bool ok = std::all_of(regime_ok.begin(), regime_ok.end(), [](int x) { return x; });
    const std::string cfg = "d=" + std::to_string(b.d) + " p=" + b.p + " q=(" + b.q1 + "," +
                            b.q2 + ")";
    t.row({std::string(to_string(b.regime)), cfg, cell(seeds), cell(sum), cell(ok ? 1 : 0)});
    details.push_back(
        {{"family", to_string(b.regime)}, {"config", cfg}, {"violations", sum}});
    total += sum;
    pass = pass && ok && sum == 0;
  }
  c.sink.csv("dominance.csv", t);
  return finish(c, "covered configurations", pass,
                std::to_string(total) + " violations over " + std::to_string(t.rows()) +
                    " configurations x " + std::to_string(seeds) + " seeds",
                {{"n", n}, {"configs", details}});
}

// ------------------------------------------------------------------- 4 urn

CriterionResult c_urn(Ctx& c) {
  const std::vector<WalkParams> sets{walk(1, "0.9"), walk(2, "0.6"), walk(3, "0.3")};
  const std::int64_t K = 10000;
  const std::size_t path_seeds = 10;
  bool identical = true;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto seed = sub_seed(c.seed, c.id, int(k));
    std::vector<int> same(path_seeds, 0);
    parallel_for(path_seeds, c.workers, [&](std::size_t s) {
      const auto cont = simulate_urn_continuous(sets[k], K, seed, static_cast<std::uint32_t>(s));
      const auto disc = simulate_urn_discrete(sets[k], K, seed, static_cast<std::uint32_t>(s));
      same[s] = cont.compositions.counts == disc.counts;
    });
    identical = identical && std::all_of(same.begin(), same.end(), [](int x) { return x; });
  }

  const std::size_t runs = 100000;
  const int kmax = 10;
  const WalkParams w = walk(2, "0.7");
  const auto seed = sub_seed(c.seed, c.id, 100);
  std::vector<double> scaled(runs * (kmax + 1));
  parallel_for(runs, c.workers, [&](std::size_t r) {
    UrnClock clock(w, seed, static_cast<std::uint32_t>(r));
    double prev = 0.0;
    for (int k = 0; k <= kmax; ++k) {
      clock.step();
      scaled[r * (kmax + 1) + k] = (k + 1) * (clock.time() - prev);
      prev = clock.time();
    }
  });
  CsvTable t({"n", "value", "stderr"});
  bool means_ok = true;
  double worst_z = 0.0;
  std::vector<double> col(runs);
  for (int k = 0; k <= kmax; ++k) {
    for (std::size_t r = 0; r < runs; ++r) col[r] = scaled[r * (kmax + 1) + k];
    const auto ms = mean_se(col);
    t.row({cell(k), cell(ms.mean), cell(ms.se)});
    const double z = std::abs(ms.mean - 1.0) / ms.se;
    worst_z = std::max(worst_z, z);
    means_ok = means_ok && z <= 3.0;
  }
  c.sink.csv("scaled_waiting_means.csv", t);
  const bool pass = identical && means_ok;
  return finish(c, "all", pass,
                std::string("skeleton ") + (identical ? "identical" : "DIFFERS") +
                    ", max |z| of scaled waits = " + g4(worst_z),
                {{"pathwise_identical", identical},
                 {"pathwise_events", K},
                 {"pathwise_seeds", path_seeds},
                 {"waiting_runs", runs},
                 {"max_abs_z", worst_z}});
}

// -------------------------------------------------------------------- 5 xi

CriterionResult c_xi(Ctx& c) {
  const std::size_t R = 10000;
  const std::int64_t H = 100000;
  const WalkParams w = walk(2, "0.7");
  const auto est = sample_limits(w, H, R, sub_seed(c.seed, c.id, 0), c.workers);
  std::vector<double> xi(R);
  for (std::size_t r = 0; r < R; ++r) xi[r] = est[r].xi_hat;
  const double ks = ks_one_sample(xi, exp1_cdf);
  const double threshold = 1.63 / std::sqrt(double(R)) + 0.02;
  std::sort(xi.begin(), xi.end());
  CsvTable t({"quantile", "value", "exp1"});
  for (double q : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
    const auto idx = static_cast<std::size_t>(q * double(R - 1));
    t.row({cell(q), cell(xi[idx]), cell(-std::log1p(-q))});
  }
  c.sink.csv("xi_quantiles.csv", t);
  const bool pass = ks < threshold;
  return finish(c, "any", pass, "KS = " + g4(ks) + " (threshold " + g4(threshold) + ")",
                {{"replicas", R}, {"horizon", H}, {"ks", ks}, {"threshold", threshold}});
}

// --------------------------------------------------------------- 6 moments

CriterionResult c_moments(Ctx& c) {
  bool factorial_ok = true;
  {
    const auto tab = moment_recursion(Param::exact(1, 1), 10);
    mpz_class f = 1;
    for (int n = 1; n <= 10; ++n) {
      f *= n;
      factorial_ok = factorial_ok && tab.r[std::size_t(n)] == mpq_class(f);
    }
  }
  const double p = 0.8;
  const auto tab = moment_recursion(Param::exact(4, 5), 5);
  const double golden = 60.0 * p * (16.0 * p * p - 9.0 * p - 1.0) /
                        ((4.0 * p - 3.0) * (4.0 * p - 3.0) * (8.0 * p - 5.0) *
                         boost::math::tgamma(10.0 * p - 4.0));
  const double rel = std::abs(tab.y[5] - golden) / std::abs(golden);
  const bool golden_ok = rel < 1e-10;

  CsvTable t({"p", "n", "log_margin"});
  bool bound_ok = true;
  json bound = json::array();
  for (const char* ps : {"0.76", "0.8", "0.9", "1"}) {
    const auto tb = moment_recursion(Param::parse(ps), 60);
    const auto rep = verify_moment_bound(tb);
    int first_fail = 0;
    for (std::size_t n = 0; n < rep.log_margin.size(); ++n) {
      t.row({ps, cell(n + 1), cell(rep.log_margin[n])});
      if (first_fail == 0 && rep.log_margin[n] < 0) first_fail = int(n + 1);
    }
    bound.push_back({{"p", ps},
                     {"holds", rep.holds},
                     {"first_failure", first_fail},
                     {"r2", tb.r[2].get_str()},
                     {"r2_bound", mpq_class(2 * tb.p / (2 * tb.p - 1)).get_str()}});
    bound_ok = bound_ok && rep.holds;
  }
  c.sink.csv("moment_bound_margins.csv", t);
  CsvTable y({"n", "value", "stderr"});
  const auto tab20 = moment_recursion(Param::exact(4, 5), 20);
  for (int n = 1; n <= 20; ++n) y.row({cell(n), cell(tab20.y[std::size_t(n)]), "0"});
  c.sink.csv("y_moments_p0.8.csv", y);

  const bool pass = factorial_ok && golden_ok && bound_ok;
  std::string summary = std::string("r_n=n! ") + (factorial_ok ? "ok" : "FAIL") +
                        ", E Y^5 rel err " + g4(rel) + ", bound " +
                        (bound_ok ? "holds" : "violated");
  if (!bound_ok) {
    std::vector<std::string> bad;
    for (const auto& b : bound) {
      if (!b["holds"].get<bool>()) {
        bad.push_back("p=" + b["p"].get<std::string>() + " from n=" +
                      std::to_string(b["first_failure"].get<int>()));
      }
    }
    summary += " (";
    for (std::size_t i = 0; i < bad.size(); ++i) summary += (i ? ", " : "") + bad[i];
    summary += ")";
  }
  return finish(c, "3/4 < p <= 1", pass, summary,
                {{"factorial_at_p1", factorial_ok},
                 {"ey5", tab.y[5]},
                 {"ey5_closed_form", golden},
                 {"ey5_rel_err", rel},
                 {"bound", bound}});
}

// --------------------------------------------------------------- 7 charfun

CriterionResult c_charfun(Ctx& c) {
  double max_norm = 0.0;
  bool norm_ok = true;
  auto track = [&](const CharFunGrid& g) {
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      max_norm = std::max(max_norm, std::hypot(g.f[k], g.g[k]));
    }
  };
  json details;

  const auto g1 = integrate_charfun_ode(1, 1.0, 50.0, 0.01);
  track(g1);
  double err1 = 0.0;
  CsvTable t1({"x", "re", "im", "abs_err"});
  for (std::size_t k = g1.origin(); k < g1.x.size(); ++k) {
    const auto exact = 1.0 / std::complex<double>(1.0, -g1.x[k]);
    const double e = std::abs(std::complex<double>(g1.f[k], g1.g[k]) - exact);
    err1 = std::max(err1, e);
    if ((k - g1.origin()) % 100 == 0) t1.row({cell(g1.x[k]), cell(g1.f[k]), cell(g1.g[k]), cell(e)});
  }
  c.sink.csv("ode_p1.csv", t1);
  const bool exact_ok = err1 < 1e-8;
  details["p1_max_err"] = err1;

  const int terms = 200;
  bool series_ok = true;
  json series = json::array();
  std::string series_summary;
  for (const char* ps : {"0.8", "0.9"}) {
    const Param pp = Param::parse(ps);
    const double p = pp.value();
    const double x_max = 0.8 * (2.0 * p - 1.0) / p;
    const auto g = integrate_charfun_ode(1, p, x_max, x_max / 200.0);
    track(g);
    const auto tab = moment_recursion(pp, terms);
    double err = 0.0;
    CsvTable t({"x", "ode_re", "ode_im", "series_re", "series_im", "abs_err"});
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const auto s = charfun_series_w(tab, g.x[k], terms);
      const double e = std::abs(s.value - std::complex<double>(g.f[k], g.g[k]));
      err = std::isfinite(e) ? std::max(err, e) : INFINITY;
      t.row({cell(g.x[k]), cell(g.f[k]), cell(g.g[k]), cell(s.value.real()),
             cell(s.value.imag()), cell(e)});
    }
    c.sink.csv(std::string("series_vs_ode_p") + ps + ".csv", t);
    // Largest |x| up to which the two agree within the tolerance.
    double agree_to = 0.0;
    for (std::size_t k = g.origin(); k < g.x.size(); ++k) {
      const auto s = charfun_series_w(tab, g.x[k], terms);
      if (!(std::abs(s.value - std::complex<double>(g.f[k], g.g[k])) < 1e-6)) break;
      agree_to = g.x[k];
    }
    const bool ok = err < 1e-6;
    series_ok = series_ok && ok;
    series.push_back(
        {{"p", ps}, {"x_max", x_max}, {"max_err", err}, {"agrees_up_to", agree_to}, {"pass", ok}});
    series_summary += std::string(series_summary.empty() ? "" : ", ") + "p=" + ps +
                      " series err " + g4(err) + (ok ? "" : " (agrees to |x|=" + g4(agree_to) + ")");
  }
  details["series"] = series;

  for (const auto& [d, ps] : {std::pair{1, "0.9"}, std::pair{2, "0.9"}, std::pair{3, "0.95"}}) {
    try {
      track(integrate_charfun_ode(d, Param::parse(ps).value(), 50.0, 0.01));
    } catch (const IntegrationError&) {
      norm_ok = false;
    }
  }
  norm_ok = norm_ok && max_norm <= 1.0 + 1e-8;
  details["max_abs_phi"] = max_norm;
  const bool pass = exact_ok && series_ok && norm_ok;
  return finish(c, "p > p_d", pass,
                "p=1 err " + g4(err1) + ", " + series_summary + ", max|phi| - 1 = " +
                    g4(max_norm - 1.0),
                details);
}

// --------------------------------------------------------------- 8 density

CriterionResult c_density(Ctx& c) {
  const double dx = 0.01;
  const auto g1 = integrate_charfun_ode(1, 1.0, 2000.0, 0.01);
  const auto d1 = density_fourier_inversion(g1, -5.0, 30.0, dx);
  double l1 = 0.0;
  CsvTable t1({"x", "density", "exact"});
  for (std::size_t k = 0; k < d1.x.size(); ++k) {
    const double x = d1.x[k];
    const double exact = x > 0 ? std::exp(-x) : 0.0;
    if (std::abs(x) >= 0.1) l1 += std::abs(d1.pw[k] - exact) * dx;
    if (k % 10 == 0) t1.row({cell(x), cell(d1.pw[k]), cell(exact)});
  }
  c.sink.csv("density_p1.csv", t1);
  const bool p1_ok = l1 < 0.02 && d1.mass >= 0.98 && d1.mass <= 1.02;

  const WalkParams w = walk(1, "0.9");
  const double dx9 = 0.005;
  const auto g9 = integrate_charfun_ode(1, 0.9, 400.0, 0.01);
  const auto d9 = density_fourier_inversion(g9, -15.0, 15.0, dx9);
  const auto cdf = d9.cdf();
  auto F = [&](double x) {
    if (x <= d9.x.front()) return 0.0;
    if (x >= d9.x.back()) return cdf.back();
    const double pos = (x - d9.x.front()) / dx9;
    const auto i = std::min(static_cast<std::size_t>(pos), cdf.size() - 2);
    const double f = pos - static_cast<double>(i);
    return cdf[i] * (1.0 - f) + cdf[i + 1] * f;
  };
  const std::size_t R = 10000;
  const std::int64_t H = 10000;
  const auto wsample = sample_w(w, H, R, sub_seed(c.seed, c.id, 0), c.workers);
  const double ks = ks_one_sample(wsample, F);
  CsvTable t9({"x", "density", "cdf"});
  for (std::size_t k = 0; k < d9.x.size(); k += 20) {
    t9.row({cell(d9.x[k]), cell(d9.pw[k]), cell(cdf[k])});
  }
  c.sink.csv("density_p0.9.csv", t9);
  const bool p9_ok = ks < 0.05;
  const bool pass = p1_ok && p9_ok;
  return finish(c, "p > p_d", pass,
                "p=1 L1 " + g4(l1) + " mass " + fmt("%.4f", d1.mass) + ", p=0.9 KS " + g4(ks),
                {{"p1_l1", l1},
                 {"p1_mass", d1.mass},
                 {"p09_mass", d9.mass},
                 {"p09_ks", ks},
                 {"p09_samples", R},
                 {"p09_horizon", H},
                 {"p09_tail_slope", d9.tail.slope}});
}

// ---------------------------------------------------------- 9 berry-esseen

CriterionResult c_berry_esseen(Ctx& c) {
  const std::size_t R = 100000;
  const std::int64_t n = 10000;
  const WalkParams half = walk(1, "1/2");
  const auto ens = run_ensemble(half, {n}, R, sub_seed(c.seed, c.id, 0), c.workers);
  const double dist = normalized_cdf_distance(ens, 0);
  const double threshold = 0.01 + 1.63 / std::sqrt(double(R));
  const bool mc_ok = dist < threshold;

  const WalkParams crit = walk(1, "3/4");
  const std::vector<std::int64_t> ns{1000, 10000, 100000};
  const auto laws = erw_exact_laws(crit.p, ns);
  std::vector<double> dists;
  CsvTable t({"n", "value", "stderr"});
  for (std::size_t k = 0; k < ns.size(); ++k) {
    dists.push_back(normalized_cdf_distance_exact(crit, ns[k], laws[k]));
    t.row({cell(ns[k]), cell(dists.back()), "0"});
  }
  c.sink.csv("exact_distance_p0.75.csv", t);
  CsvTable th({"n", "value", "stderr"});
  th.row({cell(n), cell(dist), "nan"});
  c.sink.csv("mc_distance_p0.5.csv", th);
  bool decreasing = true;
  for (std::size_t k = 1; k < dists.size(); ++k) decreasing = decreasing && dists[k] < dists[k - 1];
  const bool pass = mc_ok && decreasing;
  return finish(c, "d=1, p <= 3/4", pass,
                "p=1/2 distance " + g4(dist) + " (threshold " + g4(threshold) +
                    "), p=3/4 exact " + g4(dists[0]) + " > " + g4(dists[1]) + " > " +
                    g4(dists[2]) + (decreasing ? "" : " NOT decreasing"),
                {{"p05_distance", dist},
                 {"p05_threshold", threshold},
                 {"p075_exact", dists},
                 {"p075_n", ns}});
}

// ------------------------------------------------------------------ 10 exit

CriterionResult c_exit(Ctx& c) {
  const std::size_t R = 10000;
  const std::int64_t radii[] = {5, 10, 20};
  CsvTable t({"config", "m", "value", "stderr", "reference", "censored"});
  bool pass = true;
  double worst = 0.0;
  json details = json::array();
  int sub = 0;
  for (const auto& w : {walk(1, "1/2"), walk(2, "0.5"), walk(3, "0.9")}) {
    for (auto m : radii) {
      const auto rep = exit_time_ensemble(w, m, R, sub_seed(c.seed, c.id, sub++), c.workers);
      const bool srw = w.d == 1;
      const double ref = srw ? double(m * m) : rep.bound;
      const double z = (rep.zeta.mean - ref) / rep.zeta.se;
      const bool ok = rep.censored == 0 && (srw ? std::abs(z) <= 3.0 : z <= 3.0);
      if (srw) worst = std::max(worst, std::abs(z));
      pass = pass && ok;
      t.row({label(w), cell(m), cell(rep.zeta.mean), cell(rep.zeta.se), cell(ref),
             cell(rep.censored)});
      details.push_back({{"params", to_json(w)},
                         {"m", m},
                         {"mean", rep.zeta.mean},
                         {"se", rep.zeta.se},
                         {"reference", ref},
                         {"pass", ok}});
    }
  }
  c.sink.csv("exit_times.csv", t);
  return finish(c, "all", pass,
                "gambler's ruin max |z| = " + g4(worst) + ", bound checks " +
                    (pass ? "hold" : "see details"),
                {{"replicas", R}, {"points", details}});
}

// ------------------------------------------------------------ 11 transience

CriterionResult c_transience(Ctx& c) {
  const std::size_t R = 100;
  const std::int64_t n = 1000000;
  PathStatsConfig cfg;
  cfg.checkpoints = {10000, 100000, n};
  cfg.nu = 0.1;
  bool pass = true;
  CsvTable t({"p", "n", "value", "stderr", "statistic"});
  json details = json::array();
  std::string summary;
  int sub = 0;
  for (const char* ps : {"0.3", "0.6"}) {
    const WalkParams w = walk(3, ps);
    const auto obs = observe_replicas<PathStats>(w, n, R, sub_seed(c.seed, c.id, sub++),
                                                 c.workers, [&] { return PathStats(cfg); });
    std::size_t early = 0;
    std::vector<double> z4(R), z5(R);
    for (std::size_t r = 0; r < R; ++r) {
      early += obs[r].last_escape.back() < 10000 ? 1 : 0;
      z4[r] = double(obs[r].zeros[0]);
      z5[r] = double(obs[r].zeros[1]);
    }
    const double frac = double(early) / double(R);
    const auto m4 = mean_se(z4);
    const auto m5 = mean_se(z5);
    const double change = std::abs(m5.mean - m4.mean);
    const bool ok = frac >= 0.95 && change < 0.05;
    pass = pass && ok;
    t.row({ps, cell(n), cell(frac), "nan", "fraction_last_violation_below_1e4"});
    t.row({ps, cell(std::int64_t{10000}), cell(m4.mean), cell(m4.se), "mean_zero_count"});
    t.row({ps, cell(std::int64_t{100000}), cell(m5.mean), cell(m5.se), "mean_zero_count"});
    details.push_back({{"p", ps},
                       {"fraction_early", frac},
                       {"zeros_1e4", m4.mean},
                       {"zeros_1e5", m5.mean},
                       {"pass", ok}});
    summary += std::string(summary.empty() ? "" : ", ") + "p=" + ps + " early " +
               fmt("%.2f", frac) + " zero drift " + g4(change);
  }
  c.sink.csv("transience.csv", t);
  return finish(c, "d=3", pass, summary, {{"replicas", R}, {"n", n}, {"nu", 0.1}, {"p", details}});
}

// ----------------------------------------------------- 12 critical exponent

CriterionResult c_critical(Ctx& c) {
  const std::size_t R = 200;
  const std::int64_t n = 1000000;
  const WalkParams w = walk(2, "5/8");
  PathStatsConfig cfg;
  cfg.checkpoints = {1000, 10000, 100000, n};
  const auto obs = observe_replicas<PathStats>(w, n, R, sub_seed(c.seed, c.id, 0), c.workers,
                                               [&] { return PathStats(cfg); });
  const auto m = msd_exact(w, n);
  CsvTable t({"n", "median", "mean", "stderr", "log_msd_over_log_n"});
  double median = 0.0;
  std::vector<double> medians;
  for (std::size_t k = 0; k < cfg.checkpoints.size(); ++k) {
    std::vector<double> e;
    for (const auto& o : obs) {
      if (std::isfinite(o.exponent[k])) e.push_back(o.exponent[k]);
    }
    std::sort(e.begin(), e.end());
    const std::size_t h = e.size() / 2;
    const double med = e.size() % 2 ? e[h] : 0.5 * (e[h - 1] + e[h]);
    const auto ms = mean_se(e);
    const auto nk = cfg.checkpoints[k];
    const double ref = std::log(m[std::size_t(nk)]) / std::log(double(nk));
    t.row({cell(nk), cell(med), cell(ms.mean), cell(ms.se), cell(ref)});
    medians.push_back(med);
    median = med;
  }
  c.sink.csv("exponent.csv", t);
  const double shift = std::log(m[std::size_t(n)]) / std::log(double(n));
  const bool pass = median >= 0.9 && median <= 1.05;
  return finish(c, "critical", pass,
                "median exponent " + fmt("%.4f", median) + " (band [0.9, 1.05]; log m_n/log n = " +
                    fmt("%.4f", shift) + ")",
                {{"replicas", R},
                 {"n", n},
                 {"median", median},
                 {"medians_by_checkpoint", medians},
                 {"log_msd_over_log_n", shift}});
}

// ------------------------------------------------------------ 13 martingale

CriterionResult c_martingale(Ctx& c) {
  const std::size_t R = 10000;
  const auto grid = log_grid(1000);
  std::vector<std::int64_t> checkpoints{1, 2, 3, 4};
  for (auto g : grid) checkpoints.push_back(g);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  bool pass = true;
  double worst = 0.0;
  json details = json::array();
  int sub = 0;
  for (const auto& w : {walk(2, "0.7"), walk(1, "1/4"), walk(1, "0")}) {
    const auto ens = run_ensemble(w, checkpoints, R, sub_seed(c.seed, c.id, sub++), c.workers);
    const auto rep = martingale_residuals(ens);
    CsvTable t({"n", "statistic", "value", "stderr"});
    auto z = [](const MeanSe& m) { return m.se > 0 ? std::abs(m.mean) / m.se : 0.0; };
    for (const auto& pt : rep.points) {
      t.row({cell(pt.n), "Sbar", cell(pt.sbar.mean), cell(pt.sbar.se)});
      t.row({cell(pt.n), "N", cell(pt.N.mean), cell(pt.N.se)});
      worst = std::max({worst, z(pt.sbar), z(pt.N)});
      if (pt.has_M) {
        t.row({cell(pt.n), "M", cell(pt.M.mean), cell(pt.M.se)});
        worst = std::max(worst, z(pt.M));
      }
    }
    c.sink.csv("residuals_" + label(w) + ".csv", t);
    pass = pass && rep.pass;
    json d{{"params", to_json(w)}, {"pass", rep.pass}};
    if (rep.M_start) d["M_start_mean"] = rep.M_start->mean;
    details.push_back(d);
  }
  return finish(c, "all", pass, "max |mean|/se = " + g4(worst),
                {{"replicas", R}, {"checkpoints", checkpoints}, {"cases", details}});
}

// --------------------------------------------------------- 14 determinism

CriterionResult c_determinism(Ctx& c) {
  const int ids[] = {1, 3, 4, 10, 13};
  const int other = std::max(3, c.workers + 1);
  OutputSet serial;
  OutputSet parallel;
  for (int id : ids) {
    run_criterion(id, c.seed, 1, serial);
    run_criterion(id, c.seed, other, parallel);
  }
  const auto m1 = serial.manifest();
  const auto m2 = parallel.manifest();
  const bool pass = m1 == m2 && !serial.files().empty();
  c.sink.json_doc("manifest_workers_1.json", json::parse(m1));
  c.sink.json_doc("manifest_workers_" + std::to_string(other) + ".json", json::parse(m2));
  return finish(c, "all", pass,
                std::string("manifests ") + (pass ? "identical" : "DIFFER") + " for workers 1 vs " +
                    std::to_string(other) + " (" + std::to_string(serial.files().size()) +
                    " files)",
                {{"criteria", ids},
                 {"workers", {1, other}},
                 {"manifest_sha256", sha256_hex(m1)}});
}

using Runner = CriterionResult (*)(Ctx&);

const Runner kRunners[] = {c_msd,        c_constants,   c_coupling,   c_urn,     c_xi,
                           c_moments,    c_charfun,     c_density,    c_berry_esseen,
                           c_exit,       c_transience,  c_critical,   c_martingale,
                           c_determinism};

}  // namespace

const std::vector<CriterionInfo>& acceptance_criteria() {
  static const std::vector<CriterionInfo> list{
      {1, "msd", "exact mean-square displacement oracle"},
      {2, "constants", "memory exponent and critical parameter"},
      {3, "coupling", "pathwise coupling dominance"},
      {4, "urn", "continuous-time urn embedding"},
      {5, "xi", "xi is standard exponential"},
      {6, "moments", "moment recursion golden values and bound"},
      {7, "charfun", "characteristic function ODE"},
      {8, "density", "density by Fourier inversion"},
      {9, "berry-esseen", "normalised CDF distance"},
      {10, "exit", "exit times from balls"},
      {11, "transience", "transience property checks"},
      {12, "critical-exponent", "critical growth exponent"},
      {13, "martingale", "martingale increments"},
      {14, "determinism", "worker-count independence"},
  };
  return list;
}

std::vector<int> select_criteria(std::string_view filter) {
  const auto& list = acceptance_criteria();
  std::vector<int> ids;
  if (filter.empty()) {
    for (const auto& c : list) ids.push_back(c.id);
    return ids;
  }
  std::size_t pos = 0;
  while (pos <= filter.size()) {
    const auto end = std::min(filter.find(',', pos), filter.size());
    const auto tok = filter.substr(pos, end - pos);
    pos = end + 1;
    if (tok.empty()) continue;
    bool found = false;
    for (const auto& c : list) {
      if (tok == c.name || tok == std::to_string(c.id)) {
        ids.push_back(c.id);
        found = true;
      }
    }
    if (!found) throw ValidationError("unknown acceptance filter '" + std::string(tok) + "'");
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

bool AcceptanceReport::pass() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

std::string format_result_line(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "%s %2d %-18s ", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str());
  return head + r.summary;
}

std::string AcceptanceReport::summary_text() const {
  std::string out;
  std::size_t passed = 0;
  for (const auto& r : results) {
    out += format_result_line(r) + "\n";
    passed += r.pass ? 1 : 0;
  }
  out += std::to_string(passed) + "/" + std::to_string(results.size()) + " criteria passed\n";
  return out;
}

CriterionResult run_criterion(int id, std::uint64_t seed, int workers, OutputSet& out) {
  if (id < 1 || id > int(std::size(kRunners))) throw ValidationError("no such criterion");
  const auto& info = acceptance_criteria()[std::size_t(id - 1)];
  char dir[64];
  std::snprintf(dir, sizeof dir, "%02d_%s", id, std::string(info.name).c_str());
  Ctx ctx{id, seed, workers, Sink(out, dir)};
  return kRunners[id - 1](ctx);
}

AcceptanceReport run_acceptance(const AcceptanceOptions& opt, std::ostream* progress) {
  const auto ids = select_criteria(opt.filter);
  OutputSet out(opt.out);
  AcceptanceReport report;
  for (int id : ids) {
    const auto t0 = std::chrono::steady_clock::now();
    report.results.push_back(run_criterion(id, opt.seed, opt.workers, out));
    if (progress) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      *progress << format_result_line(report.results.back()) << "  [" << fmt("%.1f", secs)
                << " s]" << std::endl;
    }
  }
  out.add("summary.txt", report.summary_text());
  out.write_manifest();
  return report;
}

}  // namespace merw
