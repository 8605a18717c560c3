#include "merw/coupling.hpp"

#include <cstdlib>

#include "merw/errors.hpp"
#include "merw/rng.hpp"

namespace merw {

std::string_view to_string(DominanceRegime r) {
  switch (r) {
    case DominanceRegime::erw_pair: return "erw_pair";
    case DominanceRegime::merw_sandwich_low_p: return "merw_sandwich_low_p";
    case DominanceRegime::merw_sandwich_high_p: return "merw_sandwich_high_p";
    case DominanceRegime::derw_monotone: return "derw_monotone";
    case DominanceRegime::not_covered: return "not covered by paper";
  }
  return "unknown";
}

int choose_axis(std::span<const double> c, double u) {
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] > 0.0) last_positive = static_cast<int>(i);
    cum += c[i];
    if (u < cum && c[i] > 0.0) return static_cast<int>(i);
  }
  if (last_positive < 0) throw ValidationError("axis probabilities have no mass");
  return last_positive;
}

namespace {

void axis_probabilities(const WalkState& s, double a, double base, std::vector<double>& c) {
  const double n = static_cast<double>(s.n);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = a * static_cast<double>(s.axis_counts[i]) / n + base;
  }
}

int merw_sign(const WalkState& s, int axis, double a, double c_axis, double u) {
  const double coeff = c_axis > 0.0 ? a / (2.0 * static_cast<double>(s.n) * c_axis) : 0.0;
  return coupled_sign(s.position[static_cast<std::size_t>(axis)], coeff, u);
}

int derw_sign(const WalkState& s, int axis, double q, double u) {
  const auto b = s.axis_counts[static_cast<std::size_t>(axis)];
  const double coeff = b != 0 ? (2.0 * q - 1.0) / (2.0 * static_cast<double>(b)) : 0.0;
  return coupled_sign(s.position[static_cast<std::size_t>(axis)], coeff, u);
}

int to_direction(int axis, int sign) { return 2 * axis + (sign > 0 ? 0 : 1); }

void record(Trajectory& t, const WalkState& s, int dir) {
  t.times.push_back(s.n);
  t.positions.insert(t.positions.end(), s.position.begin(), s.position.end());
  t.steps.push_back(static_cast<std::uint8_t>(dir));
}

Trajectory empty_trajectory(const WalkParams& params, std::int64_t n_max, std::uint64_t seed,
                            std::uint32_t stream_id) {
  Trajectory t;
  t.params = params;
  t.seed = seed;
  t.stream_id = stream_id;
  t.n_max = n_max;
  t.stride = 1;
  t.times.reserve(static_cast<std::size_t>(n_max));
  t.positions.reserve(static_cast<std::size_t>(n_max * params.d));
  t.steps.reserve(static_cast<std::size_t>(n_max));
  return t;
}

void add_violation(DominanceReport& r, std::int64_t n, int axis,
                   std::vector<std::int64_t> values) {
  ++r.violation_count;
  if (r.violations.size() < DominanceReport::kMaxRecorded) {
    r.violations.push_back({n, axis, std::move(values)});
  }
}

}  // namespace

int coupled_merw_direction(const WalkState& state, double a, double p, double u_axis,
                           std::span<const double> u_signs) {
  const int d = state.dim();
  std::vector<double> c(static_cast<std::size_t>(d));
  axis_probabilities(state, a, 2.0 * (1.0 - p) / (2.0 * d - 1.0), c);
  const int axis = choose_axis(c, u_axis);
  const int sign = merw_sign(state, axis, a, c[static_cast<std::size_t>(axis)],
                             u_signs[static_cast<std::size_t>(axis)]);
  return to_direction(axis, sign);
}

ErwPair couple_erw_pair(const Param& p1, const Param& p2, std::int64_t n_max, std::uint64_t seed,
                        std::uint32_t stream_id) {
  if (compare(p1, p2) > 0) throw ValidationError("couple_erw_pair requires p1 <= p2");
  if (n_max < 1 || n_max > kMaxSteps) throw ValidationError("n_max must lie in [1, 2^62]");
  WalkParams lo_params{1, p1, std::nullopt, 1};
  WalkParams hi_params{1, p2, std::nullopt, 1};
  lo_params.validate();
  hi_params.validate();

  ErwPair out{empty_trajectory(lo_params, n_max, seed, stream_id),
              empty_trajectory(hi_params, n_max, seed, stream_id),
              {}};
  WalkState lo = WalkState::initial(1, 1);
  WalkState hi = WalkState::initial(1, 1);
  record(out.lower, lo, 0);
  record(out.upper, hi, 0);

  UniformStream stream(seed, stream_id, 0);
  const double c1 = 2.0 * p1.value() - 1.0;
  const double c2 = 2.0 * p2.value() - 1.0;
  DominanceReport& rep = out.report;
  rep.regime = DominanceRegime::erw_pair;
  rep.range_end = n_max;
  while (lo.n < n_max) {
    const double u = stream.next();
    const double n = static_cast<double>(lo.n);
    const int s_lo = coupled_sign(lo.position[0], c1 / (2.0 * n), u);
    const int s_hi = coupled_sign(hi.position[0], c2 / (2.0 * n), u);
    lo.apply(to_direction(0, s_lo));
    hi.apply(to_direction(0, s_hi));
    record(out.lower, lo, to_direction(0, s_lo));
    record(out.upper, hi, to_direction(0, s_hi));
    const auto x = std::llabs(lo.position[0]);
    const auto y = std::llabs(hi.position[0]);
    if (x > y || (y == 0 && x != 0)) add_violation(rep, lo.n, 1, {lo.position[0], hi.position[0]});
  }
  out.lower.final_state = lo;
  out.upper.final_state = hi;
  return out;
}

CouplingBundle couple_merw_derw(const WalkParams& params, std::vector<Param> q_list,
                                std::int64_t n_max, std::uint64_t seed,
                                std::uint32_t stream_id) {
  params.validate();
  if (n_max < 1 || n_max > kMaxSteps) throw ValidationError("n_max must lie in [1, 2^62]");
  for (const auto& q : q_list) {
    if (!(q.value() >= 0.0 && q.value() <= 1.0)) throw ValidationError("q must lie in [0,1]");
  }
  const int d = params.d;
  const double p = params.p.value();
  const double a = memory_exponent(d, p);
  const double base = 2.0 * (1.0 - p) / (2.0 * d - 1.0);

  CouplingBundle bundle;
  bundle.params = params;
  bundle.params.q.reset();
  bundle.params.initial_step = 1;
  bundle.q_list = std::move(q_list);
  bundle.n_max = n_max;
  bundle.seed = seed;
  bundle.stream_id = stream_id;
  bundle.merw = empty_trajectory(bundle.params, n_max, seed, stream_id);
  bundle.b_counts.reserve(static_cast<std::size_t>(n_max * d));

  WalkState merw_state = WalkState::initial(d, 1);
  std::vector<WalkState> derw_states(bundle.q_list.size(), merw_state);
  for (const auto& q : bundle.q_list) {
    WalkParams dp = bundle.params;
    dp.q = q;
    bundle.derw.push_back(empty_trajectory(dp, n_max, seed, stream_id));
  }
  record(bundle.merw, merw_state, 0);
  for (auto& t : bundle.derw) record(t, merw_state, 0);
  bundle.b_counts.insert(bundle.b_counts.end(), merw_state.axis_counts.begin(),
                         merw_state.axis_counts.end());

  UniformStream axis_stream(seed, stream_id, 0);
  std::vector<CounterRng> sign_rngs;
  for (int i = 0; i < d; ++i) sign_rngs.emplace_back(seed, stream_id, static_cast<std::uint32_t>(i + 1));

  std::vector<double> c(static_cast<std::size_t>(d));
  while (merw_state.n < n_max) {
    const auto index = static_cast<std::uint64_t>(merw_state.n - 1);
    const double u = axis_stream.next();
    axis_probabilities(merw_state, a, base, c);
    const int axis = choose_axis(c, u);
    const double u_sign = sign_rngs[static_cast<std::size_t>(axis)].uniform(index);

    const int dir = to_direction(axis, merw_sign(merw_state, axis, a,
                                                 c[static_cast<std::size_t>(axis)], u_sign));
    merw_state.apply(dir);
    record(bundle.merw, merw_state, dir);
    for (std::size_t k = 0; k < derw_states.size(); ++k) {
      auto& s = derw_states[k];
      const int ddir = to_direction(axis, derw_sign(s, axis, bundle.q_list[k].value(), u_sign));
      s.apply(ddir);
      record(bundle.derw[k], s, ddir);
    }
    bundle.b_counts.insert(bundle.b_counts.end(), merw_state.axis_counts.begin(),
                           merw_state.axis_counts.end());
  }
  bundle.merw.final_state = merw_state;
  for (std::size_t k = 0; k < derw_states.size(); ++k) bundle.derw[k].final_state = derw_states[k];
  return bundle;
}

namespace {

DominanceRegime classify(const CouplingBundle& b, const Param& q_lo, const Param& q_hi) {
  const std::int64_t d = b.params.d;
  const Param& p = b.params.p;
  const Rational half(1, 2);
  const Rational srw(1, 2 * d);
  const bool p_below_one = compare(p, Rational(1)) < 0;

  // Boundary q_c = (2d-1)p / (2dp - 2p + 1).
  Param q_c;
  if (p.exact()) {
    const Rational& pr = *p.exact();
    q_c = Param::exact(Rational(2 * d - 1) * pr /
                       (Rational(2 * d) * pr - Rational(2) * pr + Rational(1)));
  } else {
    const double pv = p.value();
    q_c = Param::approx((2.0 * d - 1.0) * pv / (2.0 * d * pv - 2.0 * pv + 1.0));
  }

  if (p_below_one) {
    if (compare(p, srw) <= 0 && compare(q_lo, Rational(0)) >= 0 && compare(q_lo, q_c) <= 0 &&
        compare(q_hi, half) == 0) {
      return DominanceRegime::merw_sandwich_low_p;
    }
    if (compare(p, srw) >= 0 && compare(q_lo, half) == 0 && compare(q_hi, q_c) >= 0 &&
        compare(q_hi, Rational(1)) <= 0) {
      return DominanceRegime::merw_sandwich_high_p;
    }
  }
  if (compare(q_lo, q_hi) <= 0) return DominanceRegime::derw_monotone;
  return DominanceRegime::not_covered;
}

}  // namespace

DominanceReport verify_dominance(const CouplingBundle& bundle, std::size_t lo, std::size_t hi) {
  if (lo >= bundle.derw.size() || hi >= bundle.derw.size()) {
    throw ValidationError("verify_dominance needs two d-ERW members");
  }
  DominanceReport rep;
  rep.regime = classify(bundle, bundle.q_list[lo], bundle.q_list[hi]);
  rep.range_end = bundle.n_max;
  if (!rep.covered()) return rep;

  const bool sandwich = rep.regime == DominanceRegime::merw_sandwich_low_p ||
                        rep.regime == DominanceRegime::merw_sandwich_high_p;
  const auto d = static_cast<std::size_t>(bundle.params.d);
  const auto& tl = bundle.derw[lo];
  const auto& th = bundle.derw[hi];
  for (std::size_t k = 0; k < tl.times.size(); ++k) {
    const auto xl = tl.position(k);
    const auto xh = th.position(k);
    const auto xm = bundle.merw.position(k);
    for (std::size_t i = 0; i < d; ++i) {
      const auto al = std::llabs(xl[i]);
      const auto ah = std::llabs(xh[i]);
      const auto am = std::llabs(xm[i]);
      const bool ok = sandwich ? (al <= am && am <= ah) : (al <= ah);
      if (!ok) add_violation(rep, tl.times[k], static_cast<int>(i + 1), {xl[i], xm[i], xh[i]});
    }
  }
  return rep;
}

std::vector<std::vector<std::int64_t>> decompose_derw(const CouplingBundle& bundle,
                                                      std::size_t q_index) {
  if (q_index >= bundle.derw.size()) throw ValidationError("q_index out of range");
  const auto& t = bundle.derw[q_index];
  std::vector<std::vector<std::int64_t>> axes(static_cast<std::size_t>(bundle.params.d));
  std::vector<std::int64_t> x(axes.size(), 0);
  for (auto dir : t.steps) {
    const auto i = static_cast<std::size_t>(axis_of(dir));
    x[i] += sign_of(dir);
    axes[i].push_back(x[i]);
  }
  return axes;
}

}  // namespace merw
