#include "merw/walk.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "merw/errors.hpp"

namespace merw {

namespace {

// Shared by the distribution builder and the stepper so both round identically.
// scale = a / n. Clamped at 0: at p = 0 the exact mass a + beta = 0 can round
// to a tiny negative value.
inline double merw_mass(double scale, double beta, std::int64_t count) {
  return std::max(0.0, scale * static_cast<double>(count) + beta);
}

inline double merw_beta(int d, double p) { return (1.0 - p) / (2.0 * d - 1.0); }

constexpr std::int64_t kReleaseCheckMask = (std::int64_t{1} << 16) - 1;

}  // namespace

WalkState WalkState::initial(int d, int initial_step) {
  if (d < 1) throw ValidationError("dimension d must be >= 1");
  if (initial_step == 0 || initial_step > d || initial_step < -d) {
    throw ValidationError("initial_step must name an axis");
  }
  WalkState s;
  s.n = 0;
  s.position.assign(static_cast<std::size_t>(d), 0);
  s.dir_counts.assign(static_cast<std::size_t>(2 * d), 0);
  s.axis_counts.assign(static_cast<std::size_t>(d), 0);
  s.apply(direction_of(initial_step));
  return s;
}

std::int64_t WalkState::norm2() const {
  std::int64_t s = 0;
  for (auto x : position) s += x * x;
  return s;
}

void WalkState::apply(int direction) {
  const auto axis = static_cast<std::size_t>(axis_of(direction));
  position[axis] += sign_of(direction);
  ++dir_counts[static_cast<std::size_t>(direction)];
  ++axis_counts[axis];
  ++n;
}

void WalkState::validate() const {
  const auto d = position.size();
  if (d == 0 || dir_counts.size() != 2 * d || axis_counts.size() != d) {
    throw ValidationError("walk state has mismatched vector lengths");
  }
  if (n < 1 || n > kMaxSteps) throw ValidationError("walk state time out of range");
  std::int64_t total = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const auto plus = dir_counts[2 * i];
    const auto minus = dir_counts[2 * i + 1];
    if (plus < 0 || minus < 0) throw ValidationError("negative direction count");
    if (plus + minus != axis_counts[i]) {
      throw ValidationError("N(+i) + N(-i) != b(i) on axis " + std::to_string(i + 1));
    }
    if (plus - minus != position[i]) {
      throw ValidationError("N(+i) - N(-i) != S(i) on axis " + std::to_string(i + 1));
    }
    total += axis_counts[i];
  }
  if (total != n) throw ValidationError("sum of axis counts differs from n");
}

void StepDistribution::validate() const {
  double total = 0.0;
  for (double v : probs) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("step probability outside [0,1]");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("step probabilities do not sum to 1");
}

StepDistribution merw_step_distribution(const WalkState& state, const WalkParams& params) {
  params.validate();
  state.validate();
  if (state.dim() != params.d) throw ValidationError("state dimension differs from params");
  const double a = memory_exponent(params.d, params.p.value());
  const double beta = merw_beta(params.d, params.p.value());
  StepDistribution dist;
  dist.probs.resize(state.dir_counts.size());
  const double scale = a / static_cast<double>(state.n);
  for (std::size_t k = 0; k < dist.probs.size(); ++k) {
    dist.probs[k] = merw_mass(scale, beta, state.dir_counts[k]);
  }
  return dist;
}

std::vector<double> merw_axis_probabilities(const WalkState& state, const WalkParams& params) {
  params.validate();
  state.validate();
  const double a = memory_exponent(params.d, params.p.value());
  const double base = 2.0 * merw_beta(params.d, params.p.value());
  std::vector<double> c(state.axis_counts.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = a * static_cast<double>(state.axis_counts[i]) / static_cast<double>(state.n) + base;
  }
  return c;
}

std::vector<Rational> merw_axis_probabilities_exact(const WalkState& state,
                                                    const WalkParams& params) {
  params.validate();
  state.validate();
  if (!params.p.exact()) throw ValidationError("exact axis probabilities need an exact p");
  const Rational& p = *params.p.exact();
  const std::int64_t d = params.d;
  const Rational a = (Rational(2 * d) * p - Rational(1)) / Rational(2 * d - 1);
  const Rational base = (Rational(2) - Rational(2) * p) / Rational(2 * d - 1);
  std::vector<Rational> c;
  c.reserve(state.axis_counts.size());
  for (auto b : state.axis_counts) c.push_back(a * Rational(b, state.n) + base);
  return c;
}

StepDistribution derw_step_distribution(const WalkState& state, const WalkParams& params) {
  params.validate();
  state.validate();
  if (!params.q) throw ValidationError("d-ERW step law requires q");
  const auto c = merw_axis_probabilities(state, params);
  const double bias = 2.0 * params.q->value() - 1.0;
  StepDistribution dist;
  dist.probs.resize(2 * c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto b = state.axis_counts[i];
    const double tilt =
        b != 0 ? bias * static_cast<double>(state.position[i]) / (2.0 * static_cast<double>(b))
               : 0.0;
    dist.probs[2 * i] = c[i] * (0.5 + tilt);
    dist.probs[2 * i + 1] = c[i] * (0.5 - tilt);
    assert(dist.probs[2 * i] >= -1e-15 && dist.probs[2 * i + 1] >= -1e-15);
  }
  return dist;
}

int sample_direction(std::span<const double> probs, double u) {
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > 0.0) last_positive = static_cast<int>(k);
    cum += probs[k];
    if (u < cum && probs[k] > 0.0) return static_cast<int>(k);
  }
  if (last_positive < 0) throw ValidationError("step distribution has no mass");
  return last_positive;
}

WalkState advance(const WalkState& state, const StepDistribution& dist, double u) {
  if (dist.probs.size() != state.dir_counts.size()) {
    throw ValidationError("distribution size differs from 2d");
  }
  WalkState next = state;
  next.apply(sample_direction(dist.probs, u));
  return next;
}

ConditionalMoments conditional_moments(const WalkState& state, const WalkParams& params) {
  params.validate();
  state.validate();
  const double a = memory_exponent(params.d, params.p.value());
  const double n = static_cast<double>(state.n);
  const double d = params.d;
  double norm2 = 0.0;
  double correction = 0.0;
  for (std::size_t i = 0; i < state.position.size(); ++i) {
    const double s2 = static_cast<double>(state.position[i]) * static_cast<double>(state.position[i]);
    norm2 += s2;
    correction += a * (static_cast<double>(state.axis_counts[i]) / n - 1.0 / d) * s2;
  }
  return {a * norm2 / n, norm2 / d + correction};
}

MerwStepper::MerwStepper(const WalkParams& params, std::uint64_t seed, std::uint32_t stream_id)
    : state_(WalkState::initial(params.d, params.initial_step)),
      stream_(seed, stream_id, 0),
      a_(memory_exponent(params.d, params.p.value())),
      beta_(merw_beta(params.d, params.p.value())),
      dirs_(2 * params.d) {
  params.validate();
}

int MerwStepper::step() {
  const double u = stream_.next();
  const double scale = a_ / static_cast<double>(state_.n);
  const auto* counts = state_.dir_counts.data();
  // Counting prefix sums <= u gives the first k with u < cum_k, which always
  // has positive mass; this matches sample_direction without branching.
  double cum = 0.0;
  int chosen = 0;
  for (int k = 0; k < dirs_; ++k) {
    cum += merw_mass(scale, beta_, counts[k]);
    chosen += cum <= u ? 1 : 0;
  }
  if (chosen == dirs_) {
    chosen = dirs_ - 1;
    while (chosen > 0 && !(merw_mass(scale, beta_, counts[chosen]) > 0.0)) --chosen;
  }
  state_.apply(chosen);
#ifndef NDEBUG
  state_.validate();
#else
  if ((state_.n & kReleaseCheckMask) == 0) state_.validate();
#endif
  return chosen;
}

Trajectory simulate(const WalkParams& params, std::int64_t n_max, std::uint64_t seed,
                    std::uint32_t stream_id, std::int64_t record_stride) {
  params.validate();
  if (n_max < 1 || n_max > kMaxSteps) throw ValidationError("n_max must lie in [1, 2^62]");
  if (record_stride < 1) throw ValidationError("record_stride must be >= 1");
  Trajectory t;
  t.params = params;
  t.seed = seed;
  t.stream_id = stream_id;
  t.n_max = n_max;
  t.stride = record_stride;
  MerwStepper stepper(params, seed, stream_id);
  auto record = [&](const WalkState& s) {
    t.times.push_back(s.n);
    t.positions.insert(t.positions.end(), s.position.begin(), s.position.end());
  };
  record(stepper.state());
  if (record_stride == 1) {
    t.steps.reserve(static_cast<std::size_t>(n_max));
    t.steps.push_back(static_cast<std::uint8_t>(direction_of(params.initial_step)));
  }
  while (stepper.state().n < n_max) {
    const int dir = stepper.step();
    if (record_stride == 1) t.steps.push_back(static_cast<std::uint8_t>(dir));
    const auto n = stepper.state().n;
    if (n % record_stride == 0 || n == n_max) record(stepper.state());
  }
  t.final_state = stepper.state();
  return t;
}

}  // namespace merw
