// Core walk: state bookkeeping, the exact one-step conditional laws of the
// multidimensional elephant random walk (MERW) and of the d-ERW, inverse-CDF
// stepping and trajectory generation.
//
// Directions are indexed 0..2d-1 in the fixed order +e_1,-e_1,...,+e_d,-e_d.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "merw/params.hpp"
#include "merw/rng.hpp"

namespace merw {

inline constexpr std::int64_t kMaxSteps = std::int64_t{1} << 62;

constexpr int direction_of(int signed_axis) {
  return signed_axis > 0 ? 2 * (signed_axis - 1) : 2 * (-signed_axis - 1) + 1;
}
constexpr int axis_of(int direction) { return direction / 2; }
constexpr int sign_of(int direction) { return (direction % 2 == 0) ? 1 : -1; }

struct WalkState {
  std::int64_t n = 1;
  std::vector<std::int64_t> position;     ///< S_n, length d
  std::vector<std::int64_t> dir_counts;   ///< N_n(+1),N_n(-1),...,N_n(-d)
  std::vector<std::int64_t> axis_counts;  ///< b_n(i)

  /// State at n = 1 after the first step.
  static WalkState initial(int d, int initial_step = 1);

  int dim() const { return static_cast<int>(position.size()); }
  std::int64_t norm2() const;

  /// Appends one step in the given direction (n -> n+1).
  void apply(int direction);

  /// Throws ValidationError unless sum b = n, N+ + N- = b, N+ - N- = S.
  void validate() const;

  friend bool operator==(const WalkState&, const WalkState&) = default;
};

struct StepDistribution {
  std::vector<double> probs;  ///< length 2d, direction order as above

  /// Entries in [0,1] summing to 1 within 1e-12.
  void validate() const;
};

/// P(sigma_{n+1} = +-e_i | F_n) = a N_n(+-i)/n + (1-p)/(2d-1).
StepDistribution merw_step_distribution(const WalkState& state, const WalkParams& params);

/// c_n(i) = a b_n(i)/n + (2-2p)/(2d-1): probability that the next step uses axis i.
std::vector<double> merw_axis_probabilities(const WalkState& state, const WalkParams& params);

/// c_n(i) in exact arithmetic; requires an exact p.
std::vector<Rational> merw_axis_probabilities_exact(const WalkState& state,
                                                    const WalkParams& params);

/// d-ERW law: c_n(i) (1/2 +- (2q-1) x(i) / (2 b_n(i)) 1{b_n(i) != 0}).
StepDistribution derw_step_distribution(const WalkState& state, const WalkParams& params);

/// Inverse CDF over half-open intervals [c_{k-1}, c_k). If rounding leaves u
/// beyond the last cumulative sum, the last direction with positive mass wins.
int sample_direction(std::span<const double> probs, double u);

WalkState advance(const WalkState& state, const StepDistribution& dist, double u);

struct ConditionalMoments {
  double drift = 0.0;          ///< E[S_n . sigma_{n+1} | F_n]
  double second_moment = 0.0;  ///< E[(S_n . sigma_{n+1})^2 | F_n]
};

ConditionalMoments conditional_moments(const WalkState& state, const WalkParams& params);

/// In-place MERW stepping for hot loops. step k (n -> n+1) consumes uniform
/// index n-1 of stream (seed, stream_id, lane 0), so a stepper and repeated
/// advance(merw_step_distribution(...)) produce identical paths.
class MerwStepper {
 public:
  MerwStepper(const WalkParams& params, std::uint64_t seed, std::uint32_t stream_id);

  /// Advances one step and returns the chosen direction.
  int step();
  const WalkState& state() const { return state_; }
  double a() const { return a_; }

 private:
  WalkState state_;
  UniformStream stream_;
  double a_;
  double beta_;
  int dirs_;
};

struct Trajectory {
  WalkParams params;
  std::uint64_t seed = 0;
  std::uint32_t stream_id = 0;
  std::int64_t n_max = 1;
  std::int64_t stride = 1;
  std::vector<std::int64_t> times;      ///< recorded n values
  std::vector<std::int64_t> positions;  ///< times.size() x d, row-major
  std::vector<std::uint8_t> steps;      ///< direction of sigma_1..sigma_n (stride 1 only)
  WalkState final_state;

  std::span<const std::int64_t> position(std::size_t k) const {
    const auto d = static_cast<std::size_t>(params.d);
    return {positions.data() + k * d, d};
  }
};

/// Records n = 1, every multiple of record_stride, and n_max.
Trajectory simulate(const WalkParams& params, std::int64_t n_max, std::uint64_t seed,
                    std::uint32_t stream_id, std::int64_t record_stride = 1);

}  // namespace merw
