#include "merw/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "merw/acceptance.hpp"
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

const char* const kCommands[] = {"simulate", "couple", "urn", "limit", "stats", "verify"};
const char* const kLimitMethods[] = {"moments", "charfun", "density"};
const char* const kStatsKinds[] = {"msd",        "zeros", "exit",     "axis",
                                   "cdf",        "martingale", "lil", "exponent",
                                   "escape",     "direction",  "drift"};
const char* const kCoupleModes[] = {"derw", "erw"};

template <std::size_t N>
bool member(const std::string& s, const char* const (&list)[N]) {
  return std::any_of(std::begin(list), std::end(list), [&](const char* x) { return s == x; });
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ValidationError("config key '" + key + "': " + why);
}

std::int64_t parse_int(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x == std::floor(x) && std::abs(x) < 9.2e18) return static_cast<std::int64_t>(x);
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::int64_t out = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return out;
    // 1e6 style spellings of integers
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() + s.size() && !s.empty() && x == std::floor(x) && std::abs(x) < 9.2e18) {
      return static_cast<std::int64_t>(x);
    }
  }
  bad(key, "expected an integer");
}

double parse_double(const std::string& key, const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size()) return x;
  }
  bad(key, "expected a number");
}

std::string parse_param(const std::string& key, const json& v) {
  Param p;
  if (v.is_number()) {
    p = Param::from_decimal(v.get<double>());
  } else if (v.is_string()) {
    try {
      p = Param::parse(v.get<std::string>());
    } catch (const std::exception& e) {
      bad(key, e.what());
    }
  } else {
    bad(key, "expected \"num/den\" or a number");
  }
  if (!(p.value() >= 0.0 && p.value() <= 1.0)) bad(key, "must lie in [0, 1]");
  return p.to_string();
}

std::vector<json> as_list(const json& v) {
  if (v.is_array()) return std::vector<json>(v.begin(), v.end());
  if (v.is_string()) {
    std::vector<json> out;
    for (auto& s : split(v.get<std::string>())) out.emplace_back(s);
    return out;
  }
  return {v};
}

std::vector<std::int64_t> default_checkpoints(std::int64_t n) {
  std::vector<std::int64_t> g;
  for (std::int64_t dec = 1; dec <= n; dec *= 10) {
    for (std::int64_t m : {1, 2, 5}) {
      if (m * dec <= n) g.push_back(m * dec);
    }
    if (dec > n / 10) break;
  }
  if (g.empty() || g.back() != n) g.push_back(n);
  return g;
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string replica_name(const std::string& stem, std::size_t r, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu", r);
  return stem + buf + ext;
}

// ------------------------------------------------------------------ runs

struct Run {
  const ExperimentConfig& cfg;
  OutputSet out;
  std::ostream& log;
  bool checks_pass = true;

  WalkParams params() const {
    WalkParams w;
    w.d = cfg.d;
    w.p = Param::parse(cfg.p);
    if (cfg.q.size() == 1) w.q = Param::parse(cfg.q[0]);
    w.validate();
    return w;
  }
  std::vector<std::int64_t> checkpoints() const {
    auto c = cfg.checkpoints.empty() ? default_checkpoints(cfg.n) : cfg.checkpoints;
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.front() < 1) throw ValidationError("checkpoints must be >= 1");
    return c;
  }
  void verdict_file(const std::string& name, std::string_view statistic, std::string_view regime,
                    bool pass, json details) {
    out.add_json(name, verdict(statistic, regime, pass, std::move(details)));
    checks_pass = checks_pass && pass;
    log << statistic << ": " << (pass ? "pass" : "FAIL") << " (" << regime << ")\n";
  }
};

void cmd_simulate(Run& run) {
  const auto w = run.params();
  const auto& cfg = run.cfg;
  std::vector<Trajectory> ts(cfg.replicas);
  parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
    ts[r] = simulate(w, cfg.n, cfg.seed, static_cast<std::uint32_t>(r), cfg.stride);
  });
  for (std::size_t r = 0; r < ts.size(); ++r) {
    run.out.add_csv(replica_name("trajectory", r, ".csv"), trajectory_csv(ts[r]));
    run.out.add_json(replica_name("trajectory", r, ".json"), trajectory_sidecar(ts[r]));
  }
}

void cmd_couple(Run& run) {
  const auto& cfg = run.cfg;
  const std::string mode = cfg.method.empty() ? "derw" : cfg.method;
  if (!member(mode, kCoupleModes)) throw ValidationError("couple mode must be derw or erw");
  if (cfg.q.empty()) throw ValidationError("couple needs --q");
  std::int64_t violations = 0;
  bool covered = true;
  json per_replica = json::array();
  if (mode == "erw") {
    if (cfg.d != 1) throw ValidationError("the ERW pair coupling is one-dimensional");
    const Param p1 = Param::parse(cfg.p);
    const Param p2 = Param::parse(cfg.q[0]);
    std::vector<ErwPair> pairs(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      pairs[r] = couple_erw_pair(p1, p2, cfg.n, cfg.seed, static_cast<std::uint32_t>(r));
    });
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      violations += pairs[r].report.violation_count;
      covered = covered && pairs[r].report.covered();
      per_replica.push_back(to_json(pairs[r].report));
    }
    run.out.add_csv("erw_lower.csv", trajectory_csv(pairs[0].lower));
    run.out.add_csv("erw_upper.csv", trajectory_csv(pairs[0].upper));
  } else {
    const auto w = run.params();
    std::vector<Param> qs;
    for (const auto& q : cfg.q) qs.push_back(Param::parse(q));
    std::vector<CouplingBundle> bundles(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
      bundles[r] = couple_merw_derw(w, qs, cfg.n, cfg.seed, static_cast<std::uint32_t>(r));
    });
    for (std::size_t r = 0; r < bundles.size(); ++r) {
      json reps = json::array();
      for (std::size_t k = 0; k + 1 < qs.size(); ++k) {
        const auto rep = verify_dominance(bundles[r], k, k + 1);
        violations += rep.violation_count;
        covered = covered && rep.covered();
        reps.push_back(to_json(rep));
      }
      per_replica.push_back(reps);
    }
    const auto& b0 = bundles[0];
    run.out.add_csv("merw.csv", trajectory_csv(b0.merw));
    for (std::size_t k = 0; k < b0.derw.size(); ++k) {
      run.out.add_csv(replica_name("derw_q", k, ".csv"), trajectory_csv(b0.derw[k]));
    }
    run.out.add_csv("b_counts.csv", b_counts_csv(b0));
  }
  run.out.add_json("dominance.json", json{{"mode", mode}, {"replicas", per_replica}});
  run.verdict_file("verdict.json", "coupling_dominance",
                   covered ? "covered" : "not covered by paper", covered && violations == 0,
                   {{"violations", violations}, {"replicas", cfg.replicas}});
}

void cmd_urn(Run& run) {
  const auto w = run.params();
  const auto& cfg = run.cfg;
  const auto est = sample_limits(w, cfg.n, cfg.replicas, cfg.seed, cfg.workers);
  std::vector<std::string> header{"replica", "horizon", "xi_hat", "w_hat"};
  for (int i = 1; i <= w.d; ++i) header.push_back("W" + std::to_string(i));
  for (int i = 1; i <= w.d; ++i) header.push_back("Y" + std::to_string(i));
  CsvTable t(header);
  std::vector<double> xi;
  for (std::size_t r = 0; r < est.size(); ++r) {
    const auto& e = est[r];
    std::vector<std::string> row{cell(r), cell(e.horizon), cell(e.xi_hat),
                                 e.w_hat ? cell(*e.w_hat) : "nan"};
    for (int i = 0; i < w.d; ++i) row.push_back(e.W_hat ? cell((*e.W_hat)[std::size_t(i)]) : "nan");
    for (int i = 0; i < w.d; ++i) row.push_back(e.Y_hat ? cell((*e.Y_hat)[std::size_t(i)]) : "nan");
    t.row(std::move(row));
    xi.push_back(e.xi_hat);
  }
  run.out.add_csv("limits.csv", t);

  const auto cps = run.checkpoints();
  const auto path = urn_checkpoints(w, cps.back(), cps, cfg.seed, 0);
  CsvTable conv({"n", "xi_hat", "w_hat"});
  for (std::size_t k = 0; k < path.size(); ++k) {
    conv.row({cell(cps[k]), cell(path[k].xi_hat), path[k].w_hat ? cell(*path[k].w_hat) : "nan"});
  }
  run.out.add_csv("convergence_replica_0000.csv", conv);

  if (cfg.replicas >= 2) {
    const double ks = ks_one_sample(xi, exp1_cdf);
    const double thr = 1.63 / std::sqrt(double(cfg.replicas)) + 0.02;
    run.verdict_file("verdict.json", "xi_exponential_ks", "any", ks < thr,
                     {{"ks", ks}, {"threshold", thr}, {"replicas", cfg.replicas}});
  }
}

void cmd_limit_moments(Run& run) {
  const auto& cfg = run.cfg;
  const Param p = Param::parse(cfg.p);
  const auto tab = moment_recursion(p, cfg.order);
  CsvTable t({"n", "r_n", "r_n_double", "EY_n"});
  for (int n = 0; n <= cfg.order; ++n) {
    t.row({cell(n), tab.r[std::size_t(n)].get_str(), cell(tab.r_double(n)),
           cell(tab.y[std::size_t(n)])});
  }
  run.out.add_csv("moments.csv", t);
  const auto bound = verify_moment_bound(tab);
  run.out.add_json("moment_bound.json",
                   json{{"holds", bound.holds}, {"log_margin", bound.log_margin}});
  if (cfg.order >= 5) {
    const double pv = p.value();
    const double golden = 60.0 * pv * (16.0 * pv * pv - 9.0 * pv - 1.0) /
                          ((4.0 * pv - 3.0) * (4.0 * pv - 3.0) * (8.0 * pv - 5.0) *
                           boost::math::tgamma(10.0 * pv - 4.0));
    const double rel = std::abs(tab.y[5] - golden) / std::abs(golden);
    run.verdict_file("verdict.json", "fifth_moment_closed_form", "3/4 < p <= 1", rel < 1e-10,
                     {{"EY5", tab.y[5]}, {"closed_form", golden}, {"rel_err", rel},
                      {"moment_bound_holds", bound.holds}});
  }
}

void cmd_limit_charfun(Run& run) {
  const auto& cfg = run.cfg;
  const auto g = integrate_charfun_ode(cfg.d, Param::parse(cfg.p).value(), cfg.x_max, cfg.step);
  CsvTable t({"x", "re", "im", "abs"});
  double max_abs = 0.0;
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double m = std::hypot(g.f[k], g.g[k]);
    max_abs = std::max(max_abs, m);
    t.row({cell(g.x[k]), cell(g.f[k]), cell(g.g[k]), cell(m)});
  }
  run.out.add_csv("charfun.csv", t);
  json details{{"max_abs", max_abs}, {"a", g.a}};
  bool pass = max_abs <= 1.0 + 1e-8;
  if (cfg.x_max >= 50.0) {
    const auto tail = tail_exponent_check(g);
    details["tail"] = {{"sup", tail.sup}, {"slope", tail.slope}, {"stable", tail.stable}};
    pass = pass && tail.stable;
  }
  run.verdict_file("verdict.json", "charfun_norm_and_tail", "p > p_d", pass, details);
}

void cmd_limit_density(Run& run) {
  const auto& cfg = run.cfg;
  const auto g = integrate_charfun_ode(cfg.d, Param::parse(cfg.p).value(), cfg.x_max, cfg.step);
  const auto de = density_fourier_inversion(g, cfg.lo, cfg.hi, cfg.dx);
  const auto cdf = de.cdf();
  CsvTable t({"x", "density", "cdf"});
  for (std::size_t k = 0; k < de.x.size(); ++k) t.row({cell(de.x[k]), cell(de.pw[k]), cell(cdf[k])});
  run.out.add_csv("density.csv", t);
  const bool pass = de.mass >= 0.98 && de.mass <= 1.02;
  run.verdict_file("verdict.json", "density_mass", "p > p_d", pass,
                   {{"mass", de.mass},
                    {"min_value", de.min_value},
                    {"x_max", de.x_max},
                    {"quad_step", de.quad_step},
                    {"tail_bound", de.tail_bound},
                    {"tail_slope", de.tail.slope}});
}

// ----------------------------------------------------------------- stats

void stats_msd(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  const auto ens = run_ensemble(w, cps, run.cfg.replicas, run.cfg.seed, run.cfg.workers);
  const auto rep = msd_empirical(ens);
  CsvTable t({"n", "value", "stderr", "exact"});
  std::size_t flagged = 0;
  for (const auto& pt : rep.points) {
    t.row({cell(pt.n), cell(pt.value), cell(pt.se), cell(pt.reference)});
    flagged += pt.flagged ? 1 : 0;
  }
  run.out.add_csv("msd.csv", t);
  run.verdict_file("verdict.json", "msd", "all", rep.pass, {{"flagged", flagged}});
}

std::vector<PathStats> observe(Run& run, const WalkParams& w, const PathStatsConfig& pc) {
  return observe_replicas<PathStats>(w, pc.checkpoints.back(), run.cfg.replicas, run.cfg.seed,
                                     run.cfg.workers, [&] { return PathStats(pc); });
}

void stats_zeros(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  PathStatsConfig pc;
  pc.checkpoints = cps;
  const auto obs = observe(run, w, pc);
  CsvTable t({"n", "value", "stderr"});
  std::vector<double> means;
  for (std::size_t k = 0; k < cps.size(); ++k) {
    std::vector<double> v;
    for (const auto& o : obs) v.push_back(double(o.zeros[k]));
    const auto ms = mean_se(v);
    means.push_back(ms.mean);
    t.row({cell(cps[k]), cell(ms.mean), cell(ms.se)});
  }
  run.out.add_csv("zeros.csv", t);
  if (w.d >= 3 && cps.size() >= 2) {
    const double change = std::abs(means.back() - means[means.size() - 2]);
    run.verdict_file("verdict.json", "zero_count_stabilisation", "d>=3", change < 0.05,
                     {{"change", change}});
  } else if (w.d == 1 && compare(w.p, Rational(1, 2)) == 0) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < cps.size(); ++k) {
      if (cps[k] >= 100 && means[k] > 0) {
        lx.push_back(std::log(double(cps[k])));
        ly.push_back(std::log(means[k]));
      }
    }
    double slope = NAN;
    if (lx.size() >= 2) {
      const double n = double(lx.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
      }
      slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    run.verdict_file("verdict.json", "zero_count_growth", "d=1, p=1/2",
                     std::abs(slope - 0.5) <= 0.05, {{"fitted_exponent", slope}});
  } else {
    run.verdict_file("verdict.json", "zero_count", "no assertion", true, {{"asserted", false}});
  }
}

void stats_exit(Run& run, const WalkParams& w) {
  CsvTable t({"m", "value", "stderr", "bound", "censored"});
  bool pass = true;
  const bool srw = w.d == 1 && compare(w.p, Rational(1, 2)) == 0;
  for (auto m : run.cfg.radii) {
    const auto rep = exit_time_ensemble(w, m, run.cfg.replicas, run.cfg.seed, run.cfg.workers);
    t.row({cell(m), cell(rep.zeta.mean), cell(rep.zeta.se), cell(rep.bound), cell(rep.censored)});
    pass = pass && rep.censored == 0 && rep.zeta.mean <= rep.bound + 3.0 * rep.zeta.se;
    if (srw) pass = pass && std::abs(rep.zeta.mean - double(m * m)) <= 3.0 * rep.zeta.se;
  }
  run.out.add_csv("exit.csv", t);
  run.verdict_file("verdict.json", "exit_time", srw ? "gambler's ruin" : "universal bound", pass,
                   {{"radii", run.cfg.radii}});
}

void stats_axis(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  const auto ens = run_ensemble(w, cps, run.cfg.replicas, run.cfg.seed, run.cfg.workers);
  const auto rep = axis_occupation_error(ens);
  CsvTable t({"n", "value", "stderr", "eta2", "eta2_stderr", "exact_var"});
  for (const auto& pt : rep.points) {
    t.row({cell(pt.n), cell(pt.abs_eta.mean), cell(pt.abs_eta.se), cell(pt.eta2.mean),
           cell(pt.eta2.se), cell(pt.exact_var)});
  }
  run.out.add_csv("axis.csv", t);
  const double tol = 0.05;
  run.verdict_file("verdict.json", "axis_occupation_exponent", rep.expected_form,
                   std::abs(rep.fitted_exponent - rep.expected_exponent) <= tol,
                   {{"fitted_exponent", rep.fitted_exponent},
                    {"expected_exponent", rep.expected_exponent},
                    {"tolerance", tol}});
}

void stats_cdf(Run& run, const WalkParams& w, std::vector<std::int64_t> cps) {
  const auto ens = run_ensemble(w, cps, run.cfg.replicas, run.cfg.seed, run.cfg.workers);
  std::vector<std::int64_t> exact_ns;
  for (auto n : cps) {
    if (n <= 100000) exact_ns.push_back(n);
  }
  const auto laws = erw_exact_laws(w.p, exact_ns);
  CsvTable t({"n", "value", "stderr", "exact"});
  bool pass = true;
  const double allowance = 1.63 / std::sqrt(double(run.cfg.replicas));
  for (std::size_t c = 0; c < cps.size(); ++c) {
    const double mc = normalized_cdf_distance(ens, c);
    double ex = NAN;
    if (c < laws.size()) {
      ex = normalized_cdf_distance_exact(w, cps[c], laws[c]);
      pass = pass && std::abs(mc - ex) <= allowance;
    }
    t.row({cell(cps[c]), cell(mc), "nan", cell(ex)});
  }
  run.out.add_csv("cdf_distance.csv", t);
  run.verdict_file("verdict.json", "normalized_cdf_distance", "d=1, p <= 3/4", pass,
                   {{"ks_allowance", allowance}});
}

void stats_martingale(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  const auto ens = run_ensemble(w, cps, run.cfg.replicas, run.cfg.seed, run.cfg.workers);
  const auto rep = martingale_residuals(ens);
  CsvTable t({"n", "statistic", "value", "stderr"});
  for (const auto& pt : rep.points) {
    t.row({cell(pt.n), "Sbar", cell(pt.sbar.mean), cell(pt.sbar.se)});
    if (pt.has_M) t.row({cell(pt.n), "M", cell(pt.M.mean), cell(pt.M.se)});
    t.row({cell(pt.n), "N", cell(pt.N.mean), cell(pt.N.se)});
  }
  run.out.add_csv("martingale.csv", t);
  json d;
  if (rep.M_start) d["M_start"] = {{"mean", rep.M_start->mean}, {"se", rep.M_start->se}};
  run.verdict_file("verdict.json", "martingale_residuals", "all", rep.pass, d);
}

void stats_lil(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  const auto k = derived_constants(w);
  PathStatsConfig pc;
  pc.checkpoints = cps;
  pc.lil = true;
  pc.critical_lil = k.regime == Regime::critical;
  const auto obs = observe(run, w, pc);
  CsvTable t({"n", "value", "stderr", "median"});
  for (std::size_t c = 0; c < cps.size(); ++c) {
    std::vector<double> v;
    for (const auto& o : obs) {
      if (std::isfinite(o.lil_max[c])) v.push_back(o.lil_max[c]);
    }
    const auto ms = mean_se(v);
    t.row({cell(cps[c]), cell(ms.mean), cell(ms.se), cell(median(v))});
  }
  run.out.add_csv("lil.csv", t);
  json meta{{"lil_start", PathStats::kLilStart},
            {"triple_log_floor", pc.critical_lil ? PathStats::kLilStart : 0},
            {"normalisation", pc.critical_lil ? "2 n log n log log log max(n,16)"
                                              : "2 n log log n"}};
  if (k.regime == Regime::superdiffusive) {
    meta["asserted"] = false;
    run.verdict_file("verdict.json", "lil_ratio", "out of regime", true, meta);
    return;
  }
  const double limsup = pc.critical_lil ? 1.0 : 1.0 / (1.0 - 2.0 * k.a);
  std::size_t inside = 0;
  for (const auto& o : obs) inside += o.lil_max.back() <= 3.0 * limsup ? 1 : 0;
  const double frac = double(inside) / double(obs.size());
  meta["limsup_constant"] = limsup;
  meta["fraction_within_3x"] = frac;
  run.verdict_file("verdict.json", "lil_ratio", to_string(k.regime), frac >= 0.95, meta);
}

void stats_exponent(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  PathStatsConfig pc;
  pc.checkpoints = cps;
  const auto obs = observe(run, w, pc);
  CsvTable t({"n", "value", "stderr", "median"});
  for (std::size_t c = 0; c < cps.size(); ++c) {
    std::vector<double> v;
    for (const auto& o : obs) {
      if (std::isfinite(o.exponent[c])) v.push_back(o.exponent[c]);
    }
    const auto ms = mean_se(v);
    t.row({cell(cps[c]), cell(ms.mean), cell(ms.se), cell(median(v))});
  }
  run.out.add_csv("exponent.csv", t);
  if (w.d == 2 && compare(w.p, Rational(5, 8)) == 0) {
    std::size_t inside = 0;
    for (const auto& o : obs) inside += (o.exponent.back() >= 0.8 && o.exponent.back() <= 1.1);
    const double frac = double(inside) / double(obs.size());
    run.verdict_file("verdict.json", "log_norm_exponent", "critical", frac >= 0.9,
                     {{"band", {0.8, 1.1}}, {"fraction_in_band", frac}});
  } else {
    run.verdict_file("verdict.json", "log_norm_exponent", "no assertion", true,
                     {{"asserted", false}});
  }
}

void stats_escape(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  PathStatsConfig pc;
  pc.checkpoints = cps;
  pc.nu = run.cfg.nu;
  const bool tail = compare(w.p, Rational(1, 2 * w.d)) >= 0;
  if (tail) pc.sqrt_window_begin = std::max<std::int64_t>(1, cps.back() / 10);
  const auto obs = observe(run, w, pc);
  CsvTable t({"n", "value", "stderr", "last_violation_median"});
  for (std::size_t c = 0; c < cps.size(); ++c) {
    std::vector<double> cnt, last;
    for (const auto& o : obs) {
      cnt.push_back(double(o.escape_count[c]));
      last.push_back(double(o.last_escape[c]));
    }
    const auto ms = mean_se(cnt);
    t.row({cell(cps[c]), cell(ms.mean), cell(ms.se), cell(median(last))});
  }
  run.out.add_csv("escape.csv", t);
  const bool in_regime = w.d >= 3 && run.cfg.nu < 0.5 - 1.0 / w.d;
  if (!in_regime || cps.size() < 2) {
    run.verdict_file("verdict.json", "rate_of_escape", "no assertion", true, {{"asserted", false}});
    return;
  }
  std::size_t stable = 0, clean = 0;
  for (const auto& o : obs) {
    stable += o.last_escape.back() == o.last_escape[o.last_escape.size() - 2] ? 1 : 0;
    clean += o.sqrt_violations == 0 ? 1 : 0;
  }
  const double fs = double(stable) / double(obs.size());
  const double fc = double(clean) / double(obs.size());
  run.verdict_file("verdict.json", "rate_of_escape", "d>=3", fs >= 0.95 && (!tail || fc >= 0.95),
                   {{"fraction_stable_last_violation", fs},
                    {"fraction_without_sqrt_violations", tail ? json(fc) : json(nullptr)}});
}

void stats_direction(Run& run, const WalkParams& w, const std::vector<std::int64_t>& cps) {
  PathStatsConfig pc;
  pc.checkpoints = cps;
  pc.direction = true;
  const auto obs = observe(run, w, pc);
  CsvTable t({"n", "value", "stderr", "sign_changes"});
  std::vector<double> osc_median, changes_mean;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    std::vector<double> osc, ch;
    for (const auto& o : obs) {
      osc.push_back(o.oscillation[c]);
      double total = 0;
      for (auto x : o.sign_changes[c]) total += double(x);
      ch.push_back(total);
    }
    const auto ms = mean_se(osc);
    osc_median.push_back(median(osc));
    changes_mean.push_back(mean_se(ch).mean);
    t.row({cell(cps[c]), cell(ms.mean), cell(ms.se), cell(changes_mean.back())});
  }
  run.out.add_csv("direction.csv", t);
  const auto k = derived_constants(w);
  if (cps.size() < 2) {
    run.verdict_file("verdict.json", "direction", "no assertion", true, {{"asserted", false}});
  } else if (k.regime == Regime::superdiffusive) {
    run.verdict_file("verdict.json", "direction_oscillation", "superdiffusive",
                     osc_median.back() < osc_median.front(),
                     {{"median_oscillation", osc_median}});
  } else if ((w.d >= 3) || (w.d == 2 && k.regime == Regime::critical)) {
    run.verdict_file("verdict.json", "direction_sign_changes", to_string(k.regime),
                     changes_mean.back() > changes_mean.front(),
                     {{"mean_sign_changes", changes_mean}});
  } else {
    run.verdict_file("verdict.json", "direction", "no assertion", true, {{"asserted", false}});
  }
}

void stats_drift(Run& run, const WalkParams& w) {
  const auto& cfg = run.cfg;
  const std::int64_t lo = cfg.n_lo > 0 ? cfg.n_lo : std::max<std::int64_t>(1, cfg.n / 10);
  const auto rep = lyapunov_drift_probe(w, lo, cfg.n, cfg.radius, cfg.replicas, cfg.seed,
                                        cfg.workers);
  CsvTable t({"r_lo", "r_hi", "value", "stderr", "replicas", "states", "skipped"});
  for (const auto& b : rep.bins) {
    t.row({cell(b.r_lo), cell(b.r_hi), cell(b.scaled.mean), cell(b.scaled.se), cell(b.replicas),
           cell(b.states), cell(b.skipped ? 1 : 0)});
  }
  run.out.add_csv("drift.csv", t);
  run.verdict_file("verdict.json", "lyapunov_drift", rep.regime, rep.pass,
                   {{"n_lo", lo}, {"n_hi", cfg.n}, {"radius", cfg.radius}});
}

void cmd_stats(Run& run) {
  const auto& kind = run.cfg.method;
  if (!member(kind, kStatsKinds)) throw ValidationError("unknown stats kind '" + kind + "'");
  const auto w = run.params();
  const auto cps = run.checkpoints();
  if (kind == "msd") stats_msd(run, w, cps);
  else if (kind == "zeros") stats_zeros(run, w, cps);
  else if (kind == "exit") stats_exit(run, w);
  else if (kind == "axis") stats_axis(run, w, cps);
  else if (kind == "cdf") stats_cdf(run, w, cps);
  else if (kind == "martingale") stats_martingale(run, w, cps);
  else if (kind == "lil") stats_lil(run, w, cps);
  else if (kind == "exponent") stats_exponent(run, w, cps);
  else if (kind == "escape") stats_escape(run, w, cps);
  else if (kind == "direction") stats_direction(run, w, cps);
  else stats_drift(run, w);
}

std::string usage() {
  return "usage: merw_lab <command> [options]\n"
         "  simulate                          trajectories, one CSV per replica\n"
         "  couple [derw|erw]                 coupled walks and dominance report\n"
         "  urn                               continuous-time urn and limit estimates\n"
         "  limit moments|charfun|density     limit-law numerics (d = 1 for moments)\n"
         "  stats <kind>                      kind: msd zeros exit axis cdf martingale lil\n"
         "                                    exponent escape direction drift\n"
         "  verify                            acceptance suite\n"
         "options: --config FILE --d --p --q --n --replicas --seed --stride --workers\n"
         "         --out --assert --filter --order --checkpoints --radii --nu --radius\n"
         "         --n-lo --x-max --step --lo --hi --dx\n"
         "run 'merw_lab --help' for details\n";
}

int run_cli_parsed(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace

json ExperimentConfig::to_json() const {
  json j;
  j["command"] = command;
  j["method"] = method;
  j["d"] = d;
  j["p"] = p;
  j["q"] = q;
  j["n"] = n;
  j["replicas"] = replicas;
  j["seed"] = seed;
  j["stride"] = stride;
  j["workers"] = workers;
  j["out"] = out ? json(*out) : json(nullptr);
  j["assert"] = assert_checks;
  j["filter"] = filter;
  j["order"] = order;
  j["checkpoints"] = checkpoints;
  j["radii"] = radii;
  j["nu"] = nu;
  j["radius"] = radius;
  j["n_lo"] = n_lo;
  j["x_max"] = x_max;
  j["step"] = step;
  j["lo"] = lo;
  j["hi"] = hi;
  j["dx"] = dx;
  return j;
}

ExperimentConfig config_from_json(const json& doc, ExperimentConfig c) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "command") c.command = v.get<std::string>();
    else if (key == "method" || key == "kind") c.method = v.get<std::string>();
    else if (key == "d") c.d = static_cast<int>(parse_int(key, v));
    else if (key == "p") c.p = parse_param(key, v);
    else if (key == "q") {
      c.q.clear();
      for (const auto& x : as_list(v)) c.q.push_back(parse_param(key, x));
    } else if (key == "n") c.n = parse_int(key, v);
    else if (key == "replicas") {
      const auto r = parse_int(key, v);
      if (r < 1) bad(key, "must be >= 1");
      c.replicas = static_cast<std::size_t>(r);
    } else if (key == "seed") {
      if (v.is_number_unsigned()) c.seed = v.get<std::uint64_t>();
      else c.seed = static_cast<std::uint64_t>(parse_int(key, v));
    } else if (key == "stride") c.stride = parse_int(key, v);
    else if (key == "workers") c.workers = static_cast<int>(parse_int(key, v));
    else if (key == "out") {
      if (v.is_null()) c.out.reset();
      else c.out = v.get<std::string>();
    } else if (key == "assert") {
      if (v.is_boolean()) c.assert_checks = v.get<bool>();
      else bad(key, "expected true or false");
    } else if (key == "filter") c.filter = v.get<std::string>();
    else if (key == "order") c.order = static_cast<int>(parse_int(key, v));
    else if (key == "checkpoints") {
      c.checkpoints.clear();
      for (const auto& x : as_list(v)) c.checkpoints.push_back(parse_int(key, x));
    } else if (key == "radii") {
      c.radii.clear();
      for (const auto& x : as_list(v)) c.radii.push_back(parse_int(key, x));
    } else if (key == "nu") c.nu = parse_double(key, v);
    else if (key == "radius") c.radius = parse_double(key, v);
    else if (key == "n_lo") c.n_lo = parse_int(key, v);
    else if (key == "x_max") c.x_max = parse_double(key, v);
    else if (key == "step") c.step = parse_double(key, v);
    else if (key == "lo") c.lo = parse_double(key, v);
    else if (key == "hi") c.hi = parse_double(key, v);
    else if (key == "dx") c.dx = parse_double(key, v);
    else bad(key, "unknown key");
  }
  if (c.d < 1) throw ValidationError("d must be >= 1");
  if (c.n < 1) throw ValidationError("n must be >= 1");
  if (c.stride < 1) throw ValidationError("stride must be >= 1");
  if (c.workers < 1) throw ValidationError("workers must be >= 1");
  if (c.order < 1) throw ValidationError("order must be >= 1");
  return c;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (!member(cfg.command, kCommands)) {
      err << "unknown or missing command\n" << usage();
      return kExitInvalidConfig;
    }
    if (cfg.command == "verify") {
      AcceptanceOptions opt;
      opt.seed = cfg.seed;
      opt.workers = cfg.workers;
      opt.filter = cfg.filter;
      if (cfg.out) opt.out = *cfg.out;
      const auto rep = run_acceptance(opt, &err);
      out << rep.summary_text();
      return rep.pass() ? kExitOk : kExitCheckFailed;
    }
    Run run{cfg, OutputSet(std::filesystem::path(cfg.out.value_or("merw_lab_out"))), err};
    json meta = cfg.to_json();
    meta["stream_allocation"] = "replica r uses stream_id r under the master seed";
    run.out.add_json("config.json", meta);
    if (cfg.command == "simulate") cmd_simulate(run);
    else if (cfg.command == "couple") cmd_couple(run);
    else if (cfg.command == "urn") cmd_urn(run);
    else if (cfg.command == "stats") cmd_stats(run);
    else {
      if (!member(cfg.method, kLimitMethods)) {
        throw ValidationError("limit needs one of moments, charfun, density");
      }
      if (cfg.method == "moments") cmd_limit_moments(run);
      else if (cfg.method == "charfun") cmd_limit_charfun(run);
      else cmd_limit_density(run);
    }
    run.out.write_manifest();
    out << "wrote " << run.out.files().size() + 1 << " files to " << run.out.root()->string()
        << "\n";
    if (cfg.assert_checks && !run.checks_pass) return kExitCheckFailed;
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const RegimeError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const DomainError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc <= 1) {
    err << usage();
    return kExitInvalidConfig;
  }
  try {
    return run_cli_parsed(argc, argv, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

namespace {

int run_cli_parsed(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multidimensional elephant random walk laboratory", "merw_lab"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");
  struct Flag {
    const char* flag;
    const char* key;
    const char* help;
  };
  const Flag flags[] = {
      {"--d", "d", "dimension"},
      {"--p", "p", "memory parameter, e.g. 5/8 or 0.625"},
      {"--q", "q", "d-ERW parameters (comma separated); second ERW parameter for 'couple erw'"},
      {"--n", "n", "steps, or events for urn"},
      {"--replicas", "replicas", "independent replicas"},
      {"--seed", "seed", "master seed"},
      {"--stride", "stride", "trajectory recording stride"},
      {"--workers", "workers", "worker threads (default MERW_LAB_WORKERS or all cores)"},
      {"--out", "out", "output directory"},
      {"--filter", "filter", "acceptance criteria to run (names or ids, comma separated)"},
      {"--order", "order", "moment order"},
      {"--checkpoints", "checkpoints", "comma separated checkpoint times"},
      {"--radii", "radii", "exit radii"},
      {"--nu", "nu", "escape exponent"},
      {"--radius", "radius", "inner radius of the drift probe"},
      {"--n-lo", "n_lo", "start of the drift probe window"},
      {"--x-max", "x_max", "charfun grid half-width"},
      {"--step", "step", "charfun grid step"},
      {"--lo", "lo", "density grid start"},
      {"--hi", "hi", "density grid end"},
      {"--dx", "dx", "density grid step"},
  };
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& f : flags) {
    options[f.key] = app.add_option(f.flag, values[f.key], f.help);
  }
  bool assert_flag = false;
  auto* assert_opt = app.add_flag("--assert", assert_flag, "exit 3 when a check fails");

  std::string method;
  auto* simulate = app.add_subcommand("simulate", "simulate MERW trajectories");
  auto* couple = app.add_subcommand("couple", "coupled walks");
  couple->add_option("mode", method, "derw (default) or erw");
  auto* urn = app.add_subcommand("urn", "continuous-time urn embedding");
  auto* limit = app.add_subcommand("limit", "limit-law numerics");
  limit->add_option("method", method, "moments | charfun | density")->required();
  auto* stats = app.add_subcommand("stats", "ensemble statistics");
  stats->add_option("kind", method, "statistic")->required();
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  for (auto* s : {simulate, couple, urn, limit, stats, verify}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "invalid arguments: " << e.what() << "\n" << usage();
    return kExitInvalidConfig;
  }

  try {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw ValidationError("cannot read config file " + config_path);
      doc = json::parse(f);
      if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) doc[key] = values[key];
    }
    if (assert_opt->count() > 0) doc["assert"] = assert_flag;
    for (auto* s : app.get_subcommands()) {
      doc["command"] = s->get_name();
      if (!method.empty()) doc["method"] = method;
    }
    if (!doc.contains("command")) {
      err << "no command given\n" << usage();
      return kExitInvalidConfig;
    }
    ExperimentConfig base;
    base.workers = default_workers();
    return run_experiment(config_from_json(doc, base), out, err);
  } catch (const json::exception& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"merw_lab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace merw
