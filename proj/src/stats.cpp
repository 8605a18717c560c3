#include "merw/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "merw/errors.hpp"
#include "merw/ks.hpp"

namespace merw {

std::vector<double> msd_exact(const WalkParams& params, std::int64_t n_max) {
  params.validate();
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  const double a = memory_exponent(params.d, params.p.value());
  std::vector<double> m(static_cast<std::size_t>(n_max) + 1, 0.0);
  m[1] = 1.0;
  for (std::int64_t n = 1; n < n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    m[k + 1] = (1.0 + 2.0 * a / static_cast<double>(n)) * m[k] + 1.0;
  }
  return m;
}

std::vector<double> mean_exact_1d(const Param& p, std::int64_t n_max) {
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  const double c = 2.0 * p.value() - 1.0;
  std::vector<double> e(static_cast<std::size_t>(n_max) + 1, 0.0);
  e[1] = 1.0;
  for (std::int64_t n = 1; n < n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    e[k + 1] = (1.0 + c / static_cast<double>(n)) * e[k];
  }
  return e;
}

CurveReport msd_empirical(const ReplicaEnsemble& ens) {
  if (ens.replicas < 100) throw ValidationError("msd_empirical needs at least 100 replicas");
  const auto exact = msd_exact(ens.params, ens.checkpoints.back());
  CurveReport rep;
  std::vector<double> v(ens.replicas);
  for (std::size_t c = 0; c < ens.checkpoints.size(); ++c) {
    for (std::size_t r = 0; r < ens.replicas; ++r) {
      v[r] = static_cast<double>(ens.state(r, c).norm2());
    }
    const auto ms = mean_se(v);
    CurvePoint pt;
    pt.n = ens.checkpoints[c];
    pt.value = ms.mean;
    pt.se = ms.se;
    pt.reference = exact[static_cast<std::size_t>(pt.n)];
    const double diff = std::abs(pt.value - pt.reference);
    pt.flagged = ms.se > 0.0 ? diff > 4.0 * ms.se : diff > 1e-9 * std::max(1.0, pt.reference);
    rep.pass = rep.pass && !pt.flagged;
    rep.points.push_back(pt);
  }
  return rep;
}

// ---------------------------------------------------------------------------

MartingaleWeights::MartingaleWeights(const WalkParams& params) {
  const auto dc = derived_constants(params);
  a_ = dc.a;
  case_ = Case::generic;
  if (dc.a_exact) {
    if (*dc.a_exact == Rational(-1, 2)) case_ = Case::half;
    if (*dc.a_exact == Rational(-1)) case_ = Case::one;
  } else {
    if (a_ == -0.5) case_ = Case::half;
    if (a_ == -1.0) case_ = Case::one;
  }
  i_a_ = case_ == Case::half ? 2 : case_ == Case::one ? 3 : 1;
}

double MartingaleWeights::a_n(std::int64_t n) const {
  if (n < 1) throw ValidationError("a_n needs n >= 1");
  const double nd = static_cast<double>(n);
  if (case_ == Case::one) return nd - 1.0;
  if (a_ == 0.0) return 1.0;
  if (a_ == 1.0) return 1.0 / nd;
  return std::exp(std::lgamma(nd) + std::lgamma(1.0 + a_) - std::lgamma(nd + a_));
}

double MartingaleWeights::gamma_n(std::int64_t n) const {
  if (n < i_a_) throw ValidationError("gamma_n is defined from the start index on");
  const double nd = static_cast<double>(n);
  switch (case_) {
    case Case::half: return 1.0 / (nd - 1.0);
    case Case::one: return 2.0 / ((nd - 1.0) * (nd - 2.0));
    case Case::generic: break;
  }
  if (n == 1) return 1.0;
  int s1 = 1;
  int s2 = 1;
  const double l1 = boost::math::lgamma(nd + 2.0 * a_, &s1);
  const double l2 = boost::math::lgamma(2.0 + 2.0 * a_, &s2);
  const double lead = 1.0 + 2.0 * a_;
  const double sign = (lead < 0 ? -1.0 : 1.0) * s1 * s2;
  return sign * std::exp(std::log(std::abs(lead)) + l1 - l2 - std::lgamma(nd));
}

double MartingaleWeights::a_norm2(std::int64_t n) const {
  double s = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double v = a_n(k);
    s += v * v;
  }
  return s;
}

MartingaleReport martingale_residuals(const ReplicaEnsemble& ens) {
  const MartingaleWeights w(ens.params);
  const double a = w.a();
  MartingaleReport rep;
  const std::size_t R = ens.replicas;
  std::vector<double> vs(R), vm(R), vn(R);
  auto within = [](const MeanSe& m) {
    return m.se > 0.0 ? std::abs(m.mean) <= 4.0 * m.se : std::abs(m.mean) <= 1e-12;
  };
  for (std::size_t c = 0; c < ens.checkpoints.size(); ++c) {
    const std::int64_t n = ens.checkpoints[c];
    const double nd = static_cast<double>(n);
    MartingaleResidual pt;
    pt.n = n;
    pt.has_M = n >= w.start_index();
    const double an = w.a_n(n);
    const double an1 = w.a_n(n + 1);
    const double gn = pt.has_M ? w.gamma_n(n) : 0.0;
    const double gn1 = pt.has_M ? w.gamma_n(n + 1) : 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const WalkState& s = ens.state(r, c);
      const int dir = ens.next_direction(r, c);
      const auto axis = static_cast<std::size_t>(axis_of(dir));
      const std::int64_t sgn = sign_of(dir);
      const double x1 = static_cast<double>(s.position[0]);
      const double x1_next = x1 + (axis == 0 ? static_cast<double>(sgn) : 0.0);
      const auto norm2 = static_cast<double>(s.norm2());
      const double norm2_next = norm2 + 2.0 * static_cast<double>(sgn * s.position[axis]) + 1.0;
      vs[r] = an1 * x1_next - an * x1;
      vn[r] = norm2_next - norm2 - 1.0 - 2.0 * a * norm2 / nd;
      if (pt.has_M) vm[r] = norm2_next / gn1 - norm2 / gn - 1.0 / gn1;
    }
    pt.sbar = mean_se(vs);
    pt.N = mean_se(vn);
    pt.pass = within(pt.sbar) && within(pt.N);
    if (pt.has_M) {
      pt.M = mean_se(vm);
      pt.pass = pt.pass && within(pt.M);
    }
    if (n == w.start_index()) {
      const double g = w.gamma_n(n);
      for (std::size_t r = 0; r < R; ++r) {
        vm[r] = (static_cast<double>(ens.state(r, c).norm2()) - 1.0) / g;
      }
      rep.M_start = mean_se(vm);
      pt.pass = pt.pass && within(*rep.M_start);
    }
    rep.pass = rep.pass && pt.pass;
    rep.points.push_back(pt);
  }
  return rep;
}

// ---------------------------------------------------------------------------

PathStats::PathStats(const PathStatsConfig& cfg) : cfg_(&cfg) {
  esc_norm2_cap_ = cfg.checkpoints.empty()
                       ? INFINITY
                       : std::pow(static_cast<double>(cfg.checkpoints.back()), 2.0 * cfg.nu) + 1.0;
  if (cfg.direction) {
    for (auto c : cfg.checkpoints) windows_.push_back({std::max<std::int64_t>(1, c / 10), {}, 0.0});
  }
}

double PathStats::lil_denominator(std::int64_t n) const {
  const double nd = static_cast<double>(n);
  if (cfg_->critical_lil) {
    const double floor_n = std::max(nd, static_cast<double>(kLilStart));
    return 2.0 * nd * std::log(nd) * std::log(std::log(std::log(floor_n)));
  }
  return 2.0 * nd * std::log(std::log(nd));
}

void PathStats::observe(const WalkState& s) {
  const std::int64_t n = s.n;
  const std::int64_t norm2 = s.norm2();
  const auto d = s.position.size();
  if (norm2 == 0) ++zero_count_;

  const auto nd = static_cast<double>(norm2);
  if (nd <= esc_norm2_cap_ &&
      nd <= std::pow(static_cast<double>(n), 2.0 * cfg_->nu)) {
    ++esc_count_;
    esc_last_ = n;
  }
  if (cfg_->sqrt_window_begin > 0 && n >= cfg_->sqrt_window_begin && norm2 < n) {
    const double ln = std::log(static_cast<double>(n));
    if (nd < static_cast<double>(n) / std::pow(ln, 6.0)) ++sqrt_violations;
  }

  if (cfg_->lil && n >= kLilStart) {
    if (!lil_started_ || n >= 2 * lil_ref_n_) {
      lil_ref_n_ = n;
      lil_ref_denominator_ = lil_denominator(n);
    }
    if (!lil_started_ || nd > lil_max_ * lil_ref_denominator_) {
      lil_max_ = std::max(lil_max_, nd / lil_denominator(n));
    }
    lil_started_ = true;
  }

  if (last_sign_.empty()) {
    last_sign_.assign(d, 0);
    sign_change_count_.assign(d, 0);
  }
  for (std::size_t i = 0; i < d; ++i) {
    const auto x = s.position[i];
    if (x == 0) continue;
    const int sg = x > 0 ? 1 : -1;
    if (last_sign_[i] != 0 && sg != last_sign_[i]) ++sign_change_count_[i];
    last_sign_[i] = sg;
  }

  if (cfg_->direction && norm2 != 0) {
    const double inv = 1.0 / std::sqrt(nd);
    for (std::size_t w = 0; w < windows_.size(); ++w) {
      auto& win = windows_[w];
      if (n < win.begin || n > cfg_->checkpoints[w]) continue;
      if (win.ref.empty()) {
        win.ref.resize(d);
        for (std::size_t i = 0; i < d; ++i) win.ref[i] = static_cast<double>(s.position[i]) * inv;
        continue;
      }
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += win.ref[i] * static_cast<double>(s.position[i]);
      const double angle = std::acos(std::clamp(dot * inv, -1.0, 1.0));
      win.max_angle = std::max(win.max_angle, angle);
    }
  }

  while (next_ < cfg_->checkpoints.size() && cfg_->checkpoints[next_] == n) {
    record_checkpoint(s);
    ++next_;
  }
}

void PathStats::record_checkpoint(const WalkState& s) {
  const std::int64_t n = s.n;
  const std::int64_t norm2 = s.norm2();
  zeros.push_back(zero_count_);
  exponent.push_back(norm2 > 0 && n > 1
                         ? std::log(static_cast<double>(norm2)) / std::log(static_cast<double>(n))
                         : NAN);
  lil_max.push_back(cfg_->lil && lil_started_ ? lil_max_ : NAN);
  escape_count.push_back(esc_count_);
  last_escape.push_back(esc_last_);
  oscillation.push_back(cfg_->direction ? windows_[next_].max_angle : NAN);
  sign_changes.push_back(sign_change_count_);
}

PathStats path_stats(const Trajectory& t, const PathStatsConfig& cfg) {
  if (t.stride != 1 || t.steps.empty()) {
    throw ValidationError("path statistics need a stride-1 trajectory");
  }
  PathStats ps(cfg);
  replay(t, ps);
  return ps;
}

std::int64_t count_zeros(const Trajectory& t) {
  const auto d = static_cast<std::size_t>(t.params.d);
  std::int64_t zeros = 0;
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    const auto x = t.position(k);
    bool zero = true;
    for (std::size_t i = 0; i < d; ++i) zero = zero && x[i] == 0;
    if (zero) ++zeros;
  }
  return zeros;
}

ExitTime exit_time(const WalkParams& params, std::int64_t m, std::uint64_t seed,
                   std::uint32_t stream_id, std::int64_t cap) {
  if (m < 1) throw ValidationError("exit radius must be >= 1");
  MerwStepper stepper(params, seed, stream_id);
  const std::int64_t m2 = m * m;
  while (stepper.state().norm2() < m2) {
    if (stepper.state().n >= cap) return {stepper.state().n, true};
    stepper.step();
  }
  return {stepper.state().n, false};
}

std::optional<std::int64_t> exit_time(const Trajectory& t, std::int64_t m) {
  const auto d = static_cast<std::size_t>(t.params.d);
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    const auto x = t.position(k);
    std::int64_t norm2 = 0;
    for (std::size_t i = 0; i < d; ++i) norm2 += x[i] * x[i];
    if (norm2 >= m * m) return t.times[k];
  }
  return std::nullopt;
}

ExitReport exit_time_ensemble(const WalkParams& params, std::int64_t m, std::size_t replicas,
                              std::uint64_t seed, int workers) {
  std::vector<ExitTime> times(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) {
    times[r] = exit_time(params, m, seed, static_cast<std::uint32_t>(r));
  });
  ExitReport rep;
  rep.m = m;
  rep.bound = 6.0 * static_cast<double>((m + 1) * (m + 1));
  std::vector<double> v(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    v[r] = static_cast<double>(times[r].zeta);
    if (times[r].censored) ++rep.censored;
  }
  rep.zeta = mean_se(v);
  return rep;
}

// ---------------------------------------------------------------------------

AxisReport axis_occupation_error(const ReplicaEnsemble& ens) {
  const int d = ens.params.d;
  if (d < 2) throw ValidationError("axis occupation needs d >= 2");
  if (compare(ens.params.p, Rational(1)) >= 0) throw ValidationError("axis occupation needs p < 1");
  const bool uniform = compare(ens.params.p, Rational(1, 2 * d)) == 0;
  AxisReport rep;
  std::vector<double> va(ens.replicas), v2(ens.replicas);
  std::vector<double> lx, ly;
  for (std::size_t c = 0; c < ens.checkpoints.size(); ++c) {
    AxisPoint pt;
    pt.n = ens.checkpoints[c];
    const double nd = static_cast<double>(pt.n);
    for (std::size_t r = 0; r < ens.replicas; ++r) {
      const auto& s = ens.state(r, c);
      const double eta = static_cast<double>(s.axis_counts[0]) / nd - 1.0 / d;
      va[r] = std::abs(eta);
      v2[r] = eta * eta;
      std::int64_t total = 0;
      for (auto b : s.axis_counts) total += b;
      pt.max_sum_abs = std::max(pt.max_sum_abs, std::abs(static_cast<double>(total - pt.n)) / nd);
    }
    pt.abs_eta = mean_se(va);
    pt.eta2 = mean_se(v2);
    if (uniform) pt.exact_var = (nd - 1.0) * (1.0 / d) * (1.0 - 1.0 / d) / (nd * nd);
    if (pt.abs_eta.mean > 0.0 && pt.n > 1) {
      lx.push_back(std::log(nd));
      ly.push_back(std::log(pt.abs_eta.mean));
    }
    rep.points.push_back(pt);
  }
  if (lx.size() >= 2) {
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sx += lx[k];
      sy += ly[k];
      sxx += lx[k] * lx[k];
      sxy += lx[k] * ly[k];
    }
    rep.fitted_exponent = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  const auto dc = derived_constants(ens.params);
  switch (dc.regime) {
    case Regime::diffusive:
      rep.expected_exponent = 0.5;
      rep.expected_form = "n^-1/2";
      break;
    case Regime::critical:
      rep.expected_exponent = 0.5;
      rep.expected_form = "n^-1/2 with a log factor";
      break;
    case Regime::superdiffusive:
      rep.expected_exponent = 2.0 * d * (1.0 - ens.params.p.value()) / (2.0 * d - 1.0);
      rep.expected_form = "n^-2d(1-p)/(2d-1)";
      break;
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

void require_cdf_regime(const WalkParams& params) {
  if (params.d != 1 || compare(params.p, Rational(3, 4)) > 0) {
    throw RegimeError("normalised CDF distance needs d = 1 and p <= 3/4");
  }
}

}  // namespace

double normalize_position(const WalkParams& params, std::int64_t n, std::int64_t s) {
  require_cdf_regime(params);
  const double nd = static_cast<double>(n);
  const double x = static_cast<double>(s);
  if (compare(params.p, Rational(3, 4)) == 0) {
    if (n < 2) throw ValidationError("the n log n normalisation needs n >= 2");
    return x / std::sqrt(nd * std::log(nd));
  }
  return std::sqrt(3.0 - 4.0 * params.p.value()) * x / std::sqrt(nd);
}

double normalized_cdf_distance(const ReplicaEnsemble& ens, std::size_t c) {
  require_cdf_regime(ens.params);
  std::vector<double> z(ens.replicas);
  for (std::size_t r = 0; r < ens.replicas; ++r) {
    z[r] = normalize_position(ens.params, ens.checkpoints[c], ens.state(r, c).position[0]);
  }
  return ks_one_sample(std::move(z), normal_cdf);
}

std::vector<std::vector<double>> erw_exact_laws(const Param& p,
                                                const std::vector<std::int64_t>& ns) {
  if (ns.empty()) return {};
  if (!std::is_sorted(ns.begin(), ns.end()) || ns.front() < 1) {
    throw ValidationError("exact laws need ascending n >= 1");
  }
  const double c = 2.0 * p.value() - 1.0;
  const auto n_max = static_cast<std::size_t>(ns.back());
  // prob[u] = P(u up-steps among the first n), S_n = 2u - n.
  std::vector<double> prob(n_max + 2, 0.0), next(n_max + 2, 0.0);
  prob[1] = 1.0;
  std::size_t lo = 1, hi = 1;  // support of prob
  constexpr double kNegligible = 1e-300;
  std::vector<std::vector<double>> out;
  std::size_t want = 0;
  for (std::size_t n = 1;; ++n) {
    while (want < ns.size() && static_cast<std::size_t>(ns[want]) == n) {
      out.emplace_back(prob.begin(), prob.begin() + static_cast<std::ptrdiff_t>(n + 1));
      ++want;
    }
    if (n == n_max) break;
    const double nd = static_cast<double>(n);
    const double scale = c / (2.0 * nd);
    for (std::size_t u = lo; u <= hi + 1; ++u) {
      double v = 0.0;
      if (u <= hi) v += prob[u] * (0.5 - scale * (2.0 * static_cast<double>(u) - nd));
      if (u >= lo + 1) v += prob[u - 1] * (0.5 + scale * (2.0 * static_cast<double>(u - 1) - nd));
      next[u] = v;
    }
    std::swap(prob, next);
    ++hi;
    // Both buffers stay zero outside [lo, hi].
    while (lo < hi && prob[lo] < kNegligible) {
      prob[lo] = next[lo] = 0.0;
      ++lo;
    }
    while (hi > lo && prob[hi] < kNegligible) {
      prob[hi] = next[hi] = 0.0;
      --hi;
    }
  }
  return out;
}

double normalized_cdf_distance_exact(const WalkParams& params, std::int64_t n,
                                     const std::vector<double>& law) {
  require_cdf_regime(params);
  double cum = 0.0;
  double d = 0.0;
  for (std::size_t u = 0; u < law.size(); ++u) {
    if (law[u] == 0.0) continue;
    const auto s = 2 * static_cast<std::int64_t>(u) - n;
    const double phi = normal_cdf(normalize_position(params, n, s));
    d = std::max(d, std::abs(cum - phi));
    cum += law[u];
    d = std::max(d, std::abs(cum - phi));
  }
  return d;
}

// ---------------------------------------------------------------------------

DriftReport lyapunov_drift_probe(const WalkParams& params, std::int64_t n_lo, std::int64_t n_hi,
                                 double r, std::size_t replicas, std::uint64_t seed, int workers,
                                 std::size_t min_replicas) {
  params.validate();
  if (params.d != 2) throw ValidationError("the drift probe is defined for d = 2");
  if (!(n_lo >= 1 && n_hi >= n_lo)) throw ValidationError("bad time window");
  if (!(r >= 2.0)) throw ValidationError("radius must be >= 2");
  DriftReport rep;
  rep.regime = compare(params.p, Rational(5, 8)) < 0 ? "a<1/2" : "out of regime";

  const double a = memory_exponent(2, params.p.value());
  const double beta = (1.0 - params.p.value()) / 3.0;
  const double max_norm = std::sqrt(2.0) * static_cast<double>(n_hi);
  std::size_t nbins = 1;
  while (r * std::pow(2.0, static_cast<double>(nbins)) < max_norm) ++nbins;

  struct Acc {
    std::vector<double> sum;
    std::vector<std::int64_t> count;
  };
  std::vector<Acc> acc(replicas);
  parallel_for(replicas, workers, [&](std::size_t rep_i) {
    Acc& A = acc[rep_i];
    A.sum.assign(nbins, 0.0);
    A.count.assign(nbins, 0);
    MerwStepper stepper(params, seed, static_cast<std::uint32_t>(rep_i));
    while (stepper.state().n < n_hi) {
      const WalkState& s = stepper.state();
      if (s.n >= n_lo) {
        const double norm2 = static_cast<double>(s.norm2());
        const double norm = std::sqrt(norm2);
        if (norm > r) {
          const double nd = static_cast<double>(s.n);
          const double L = std::log(norm);
          const double imbalance = std::abs(static_cast<double>(s.axis_counts[0]) / nd - 0.5) +
                                   std::abs(static_cast<double>(s.axis_counts[1]) / nd - 0.5);
          if (0.1 - L * imbalance > 0.0) {
            const double sqrtL = std::sqrt(L);
            double drift = 0.0;
            for (int k = 0; k < 4; ++k) {
              const double prob =
                  a * static_cast<double>(s.dir_counts[static_cast<std::size_t>(k)]) / nd + beta;
              const double xe =
                  static_cast<double>(sign_of(k)) *
                  static_cast<double>(s.position[static_cast<std::size_t>(axis_of(k))]);
              const double dlog = 0.5 * std::log1p((2.0 * xe + 1.0) / norm2);
              drift += prob * dlog / (std::sqrt(L + dlog) + sqrtL);
            }
            const double corrected = drift - a / (2.0 * nd * sqrtL);
            const double scaled = corrected * 2.0 * norm2 * L * sqrtL;
            const auto bin = std::min<std::size_t>(
                nbins - 1, static_cast<std::size_t>(std::floor(std::log2(norm / r))));
            A.sum[bin] += scaled;
            ++A.count[bin];
          }
        }
      }
      stepper.step();
    }
  });

  for (std::size_t b = 0; b < nbins; ++b) {
    DriftBin bin;
    bin.r_lo = r * std::pow(2.0, static_cast<double>(b));
    bin.r_hi = 2.0 * bin.r_lo;
    std::vector<double> means;
    for (const auto& A : acc) {
      if (A.count[b] == 0) continue;
      means.push_back(A.sum[b] / static_cast<double>(A.count[b]));
      bin.states += A.count[b];
    }
    bin.replicas = means.size();
    if (bin.replicas == 0) continue;
    bin.scaled = mean_se(means);
    bin.skipped = bin.replicas < min_replicas;
    if (!bin.skipped && rep.regime == "a<1/2") {
      bin.pass = bin.scaled.mean <= 3.0 * bin.scaled.se;
      rep.pass = rep.pass && bin.pass;
    }
    rep.bins.push_back(bin);
  }
  return rep;
}

}  // namespace merw
