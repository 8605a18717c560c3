#include "merw/urn.hpp"

#include <algorithm>
#include <cmath>

#include "merw/errors.hpp"
#include "merw/ks.hpp"
#include "merw/parallel.hpp"

namespace merw {

namespace {

std::int64_t scaled_index(double u, std::int64_t n) {
  const auto k = static_cast<std::int64_t>(u * static_cast<double>(n));
  return std::min(k, n - 1);
}

bool superdiffusive(const WalkParams& params) {
  return derived_constants(params).regime == Regime::superdiffusive;
}

}  // namespace

UrnSkeleton::UrnSkeleton(const WalkParams& params, std::uint64_t seed, std::uint32_t stream_id)
    : d_(params.d),
      p_(params.p.value()),
      counts_(static_cast<std::size_t>(2 * params.d), 0),
      stream_(seed, stream_id, 0) {
  params.validate();
  counts_[0] = 1;
}

int UrnSkeleton::step() {
  const double u_draw = stream_.next();
  const double u_add = stream_.next();
  std::int64_t ball = scaled_index(u_draw, total_);
  int drawn = 0;
  while (ball >= counts_[static_cast<std::size_t>(drawn)]) {
    ball -= counts_[static_cast<std::size_t>(drawn)];
    ++drawn;
  }
  int added = drawn;
  if (!(u_add < p_)) {
    const std::int64_t others = 2 * d_ - 1;
    const double v = (u_add - p_) / (1.0 - p_);
    const auto k = static_cast<int>(scaled_index(v, others));
    added = k < drawn ? k : k + 1;
  }
  ++counts_[static_cast<std::size_t>(added)];
  ++total_;
  return added;
}

std::vector<std::int64_t> UrnSkeleton::position() const {
  std::vector<std::int64_t> s(static_cast<std::size_t>(d_));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = counts_[2 * i] - counts_[2 * i + 1];
  return s;
}

UrnClock::UrnClock(const WalkParams& params, std::uint64_t seed, std::uint32_t stream_id)
    : skeleton_(params, seed, stream_id), clock_(seed, stream_id, 1) {}

int UrnClock::step() {
  const double k = static_cast<double>(skeleton_.total());
  tau_ += -std::log1p(-clock_.next()) / k;
  return skeleton_.step();
}

UrnSequence simulate_urn_discrete(const WalkParams& params, std::int64_t n_events,
                                  std::uint64_t seed, std::uint32_t stream_id) {
  if (n_events < 0) throw ValidationError("n_events must be >= 0");
  UrnSkeleton urn(params, seed, stream_id);
  UrnSequence out;
  out.d = params.d;
  out.counts.reserve(static_cast<std::size_t>((n_events + 1) * 2 * params.d));
  out.counts.insert(out.counts.end(), urn.counts().begin(), urn.counts().end());
  for (std::int64_t k = 0; k < n_events; ++k) {
    urn.step();
    out.counts.insert(out.counts.end(), urn.counts().begin(), urn.counts().end());
  }
  return out;
}

UrnRun simulate_urn_continuous(const WalkParams& params, std::int64_t n_events,
                               std::uint64_t seed, std::uint32_t stream_id) {
  if (n_events < 1) throw ValidationError("n_events must be >= 1");
  UrnClock urn(params, seed, stream_id);
  UrnRun run;
  run.params = params;
  run.seed = seed;
  run.stream_id = stream_id;
  run.compositions.d = params.d;
  run.jump_times.reserve(static_cast<std::size_t>(n_events + 1));
  auto& rows = run.compositions.counts;
  rows.reserve(static_cast<std::size_t>((n_events + 1) * 2 * params.d));
  run.jump_times.push_back(0.0);
  rows.insert(rows.end(), urn.skeleton().counts().begin(), urn.skeleton().counts().end());
  for (std::int64_t k = 0; k < n_events; ++k) {
    urn.step();
    run.jump_times.push_back(urn.time());
    rows.insert(rows.end(), urn.skeleton().counts().begin(), urn.skeleton().counts().end());
  }
  return run;
}

const std::vector<double>& LimitEstimates::W() const {
  if (!W_hat) throw RegimeError("W is only defined for p > p_d");
  return *W_hat;
}

double LimitEstimates::w() const {
  if (!w_hat) throw RegimeError("w is only defined for p > p_d");
  return *w_hat;
}

const std::vector<double>& LimitEstimates::Y() const {
  if (!Y_hat) throw RegimeError("Y is only defined for p > p_d");
  return *Y_hat;
}

LimitEstimates estimate_limits(std::span<const std::int64_t> counts, double tau,
                               const WalkParams& params) {
  const auto d = static_cast<std::size_t>(params.d);
  if (counts.size() != 2 * d) throw ValidationError("composition has wrong length");
  std::int64_t balls = 0;
  for (auto c : counts) balls += c;
  LimitEstimates est;
  est.horizon = balls - 1;
  est.xi_hat = static_cast<double>(balls) * std::exp(-tau);
  if (!superdiffusive(params)) return est;

  const double a = memory_exponent(params.d, params.p.value());
  const double time_scale = std::exp(-a * tau);
  const double size_scale = std::pow(static_cast<double>(balls), -a);
  std::vector<double> W(d);
  std::vector<double> Y(d);
  double w = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const auto diff = static_cast<double>(counts[2 * i] - counts[2 * i + 1]);
    W[i] = diff * time_scale;
    Y[i] = diff * size_scale;
    w += W[i];
  }
  est.W_hat = std::move(W);
  est.Y_hat = std::move(Y);
  est.w_hat = w;
  return est;
}

LimitEstimates estimate_limits(const UrnRun& run, const WalkParams& params) {
  const auto K = static_cast<std::size_t>(run.horizon());
  return estimate_limits(run.compositions.row(K), run.jump_times[K], params);
}

std::vector<LimitEstimates> urn_checkpoints(const WalkParams& params, std::int64_t horizon,
                                            std::span<const std::int64_t> checkpoints,
                                            std::uint64_t seed, std::uint32_t stream_id) {
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  UrnClock urn(params, seed, stream_id);
  std::vector<LimitEstimates> out;
  std::size_t next = 0;
  for (std::int64_t k = 1; k <= horizon; ++k) {
    urn.step();
    while (next < checkpoints.size() && checkpoints[next] == k) {
      out.push_back(estimate_limits(urn.skeleton().counts(), urn.time(), params));
      ++next;
    }
  }
  return out;
}

std::vector<LimitEstimates> sample_limits(const WalkParams& params, std::int64_t horizon,
                                          std::size_t replicas, std::uint64_t seed,
                                          int workers) {
  params.validate();
  std::vector<LimitEstimates> out(replicas);
  const std::int64_t checkpoint[] = {horizon};
  parallel_for(replicas, workers, [&](std::size_t r) {
    out[r] = urn_checkpoints(params, horizon, checkpoint, seed, static_cast<std::uint32_t>(r))[0];
  });
  return out;
}

std::vector<double> sample_w(const WalkParams& params, std::int64_t horizon,
                             std::size_t replicas, std::uint64_t seed, int workers) {
  if (!superdiffusive(params)) throw RegimeError("sample_w requires p > p_d");
  const auto est = sample_limits(params, horizon, replicas, seed, workers);
  std::vector<double> w;
  w.reserve(est.size());
  for (const auto& e : est) w.push_back(e.w());
  return w;
}

double fixed_point_check(std::span<const double> sample, const WalkParams& params,
                         std::uint64_t seed) {
  if (sample.empty()) throw ValidationError("fixed_point_check needs a non-empty sample");
  if (!superdiffusive(params)) throw RegimeError("fixed_point_check requires p > p_d");
  const int d = params.d;
  const double p = params.p.value();
  const double a = memory_exponent(d, p);
  const double same = (d * p + d - 1.0) / (2.0 * d - 1.0);
  const auto n = static_cast<std::int64_t>(sample.size());
  UniformStream u(seed, 0, 2);
  std::vector<double> rhs(sample.size());
  for (auto& v : rhs) {
    const double w1 = sample[static_cast<std::size_t>(scaled_index(u.next(), n))];
    const double w2 = sample[static_cast<std::size_t>(scaled_index(u.next(), n))];
    const double tau = -std::log1p(-u.next());
    const bool alpha = u.next() < same;
    v = std::exp(-a * tau) * (alpha ? w1 + w2 : w1 - w2);
  }
  return ks_two_sample(std::vector<double>(sample.begin(), sample.end()), std::move(rhs));
}

double two_sample_ks_threshold(std::size_t n, std::size_t m) {
  const double c = std::sqrt(-std::log(0.001 / 2.0) / 2.0);
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace merw
