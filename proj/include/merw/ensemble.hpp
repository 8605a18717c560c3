// Replica ensembles: independent walks under one master seed (replica r uses
// stream_id r), deterministic reductions, and streaming observers.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "merw/parallel.hpp"
#include "merw/walk.hpp"

namespace merw {

/// Pairwise sum over a fixed binary tree: the result depends only on the
/// order of `v`, never on how the work was scheduled.
double tree_sum(std::span<const double> v);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Sample mean and standard error (sample sd / sqrt(count)).
MeanSe mean_se(std::span<const double> v);

struct ReplicaEnsemble {
  WalkParams params;
  std::uint64_t master_seed = 0;
  std::size_t replicas = 0;
  std::vector<std::int64_t> checkpoints;  ///< ascending
  std::vector<WalkState> states;          ///< replicas x checkpoints, row-major
  std::vector<std::uint8_t> next_dir;     ///< direction of the step after each checkpoint

  const WalkState& state(std::size_t r, std::size_t c) const {
    return states[r * checkpoints.size() + c];
  }
  int next_direction(std::size_t r, std::size_t c) const {
    return next_dir[r * checkpoints.size() + c];
  }
};

/// Runs every replica to max(checkpoints) + 1 and keeps the states at the
/// checkpoints together with the following step.
ReplicaEnsemble run_ensemble(const WalkParams& params, std::vector<std::int64_t> checkpoints,
                             std::size_t replicas, std::uint64_t seed, int workers);

/// Calls make() once per replica, then obs.observe(state) for n = 1..n_max
/// and obs.finish(). Observers are returned in replica order.
template <class Observer, class Make>
std::vector<Observer> observe_replicas(const WalkParams& params, std::int64_t n_max,
                                       std::size_t replicas, std::uint64_t seed, int workers,
                                       Make make) {
  params.validate();
  std::vector<Observer> out;
  out.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) out.push_back(make());
  parallel_for(replicas, workers, [&](std::size_t r) {
    MerwStepper stepper(params, seed, static_cast<std::uint32_t>(r));
    Observer& obs = out[r];
    obs.observe(stepper.state());
    while (stepper.state().n < n_max) {
      stepper.step();
      obs.observe(stepper.state());
    }
    obs.finish();
  });
  return out;
}

/// Replays a stride-1 trajectory through an observer.
template <class Observer>
void replay(const Trajectory& t, Observer& obs) {
  WalkState s = WalkState::initial(t.params.d, t.params.initial_step);
  obs.observe(s);
  for (std::size_t k = 1; k < t.steps.size(); ++k) {
    s.apply(t.steps[k]);
    obs.observe(s);
  }
  obs.finish();
}

}  // namespace merw
