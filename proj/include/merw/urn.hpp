// The 2d-colour urn behind the MERW and its continuous-time (exponential
// clock) embedding, plus plug-in estimators for the almost-sure limits.
//
// Uniform layout for (seed, stream_id): lane 0 drives the jump skeleton with
// two uniforms per event (draw, then add); lane 1 drives the waiting times.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "merw/params.hpp"
#include "merw/rng.hpp"

namespace merw {

/// Draw-and-add urn. Starts with one ball of colour +e_1; each event draws a
/// ball uniformly, puts it back and adds a ball of the same colour with
/// probability p, else one of the other 2d-1 colours uniformly.
class UrnSkeleton {
 public:
  UrnSkeleton(const WalkParams& params, std::uint64_t seed, std::uint32_t stream_id = 0);

  /// One event; returns the colour of the added ball.
  int step();

  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t total() const { return total_; }
  std::int64_t events() const { return total_ - 1; }
  /// S = sum_i (N(+i) - N(-i)) e_i
  std::vector<std::int64_t> position() const;

 private:
  int d_;
  double p_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 1;
  UniformStream stream_;
};

/// Skeleton plus exponential clocks: with k balls present the next ring comes
/// after an Exp(k) wait, drawn by inversion from lane 1.
class UrnClock {
 public:
  UrnClock(const WalkParams& params, std::uint64_t seed, std::uint32_t stream_id = 0);

  int step();
  double time() const { return tau_; }
  const UrnSkeleton& skeleton() const { return skeleton_; }

 private:
  UrnSkeleton skeleton_;
  UniformStream clock_;
  double tau_ = 0.0;
};

/// Rows N_1..N_{n_events+1}, each of length 2d, flattened.
struct UrnSequence {
  int d = 1;
  std::vector<std::int64_t> counts;

  std::size_t size() const { return counts.size() / static_cast<std::size_t>(2 * d); }
  std::span<const std::int64_t> row(std::size_t k) const {
    const auto w = static_cast<std::size_t>(2 * d);
    return {counts.data() + k * w, w};
  }
};

UrnSequence simulate_urn_discrete(const WalkParams& params, std::int64_t n_events,
                                  std::uint64_t seed, std::uint32_t stream_id = 0);

struct UrnRun {
  WalkParams params;
  std::uint64_t seed = 0;
  std::uint32_t stream_id = 0;
  std::vector<double> jump_times;  ///< tau_0 = 0, ..., tau_K
  UrnSequence compositions;        ///< row k is U at tau_k

  std::int64_t horizon() const { return static_cast<std::int64_t>(jump_times.size()) - 1; }
};

UrnRun simulate_urn_continuous(const WalkParams& params, std::int64_t n_events,
                               std::uint64_t seed, std::uint32_t stream_id = 0);

struct LimitEstimates {
  std::int64_t horizon = 0;  ///< K
  double xi_hat = 0.0;       ///< (K+1) exp(-tau_K)
  std::optional<std::vector<double>> W_hat;
  std::optional<double> w_hat;
  std::optional<std::vector<double>> Y_hat;

  /// Throw RegimeError when the estimate is undefined (p <= p_d).
  const std::vector<double>& W() const;
  double w() const;
  const std::vector<double>& Y() const;
};

/// Estimates from a composition with k+1 balls at time tau_k.
LimitEstimates estimate_limits(std::span<const std::int64_t> counts, double tau,
                               const WalkParams& params);
LimitEstimates estimate_limits(const UrnRun& run, const WalkParams& params);

/// Runs one urn to `horizon` events and records estimates at each checkpoint
/// (ascending event counts, last one = horizon). Memory is O(d).
std::vector<LimitEstimates> urn_checkpoints(const WalkParams& params, std::int64_t horizon,
                                            std::span<const std::int64_t> checkpoints,
                                            std::uint64_t seed, std::uint32_t stream_id);

/// Independent replicas (stream_id = replica index) at one horizon.
std::vector<LimitEstimates> sample_limits(const WalkParams& params, std::int64_t horizon,
                                          std::size_t replicas, std::uint64_t seed,
                                          int workers);

/// w_hat over replicas; throws RegimeError unless p > p_d.
std::vector<double> sample_w(const WalkParams& params, std::int64_t horizon,
                             std::size_t replicas, std::uint64_t seed, int workers);

/// Two-sample KS distance between `sample` and bootstrap draws of
/// exp(-a tau) (w1 + w2) [prob (dp+d-1)/(2d-1)] or exp(-a tau) (w1 - w2).
double fixed_point_check(std::span<const double> sample, const WalkParams& params,
                         std::uint64_t seed);

/// Two-sample KS critical value c(alpha) sqrt((n+m)/(n m)) at level 0.001.
double two_sample_ks_threshold(std::size_t n, std::size_t m);

}  // namespace merw
