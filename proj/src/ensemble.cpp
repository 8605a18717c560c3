#include "merw/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "merw/errors.hpp"

namespace merw {

double tree_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  const std::size_t half = v.size() / 2;
  return tree_sum(v.subspan(0, half)) + tree_sum(v.subspan(half));
}

MeanSe mean_se(std::span<const double> v) {
  MeanSe out;
  out.count = v.size();
  if (v.empty()) return out;
  const double n = static_cast<double>(v.size());
  out.mean = tree_sum(v) / n;
  if (v.size() < 2) return out;
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - out.mean) * (v[i] - out.mean);
  out.se = std::sqrt(tree_sum(dev) / (n - 1.0) / n);
  return out;
}

ReplicaEnsemble run_ensemble(const WalkParams& params, std::vector<std::int64_t> checkpoints,
                             std::size_t replicas, std::uint64_t seed, int workers) {
  params.validate();
  if (checkpoints.empty()) throw ValidationError("ensemble needs at least one checkpoint");
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.front() < 1 || checkpoints.back() >= kMaxSteps) {
    throw ValidationError("checkpoints must lie in [1, 2^62)");
  }
  ReplicaEnsemble ens;
  ens.params = params;
  ens.master_seed = seed;
  ens.replicas = replicas;
  ens.checkpoints = std::move(checkpoints);
  const std::size_t nc = ens.checkpoints.size();
  ens.states.resize(replicas * nc);
  ens.next_dir.resize(replicas * nc);
  parallel_for(replicas, workers, [&](std::size_t r) {
    MerwStepper stepper(params, seed, static_cast<std::uint32_t>(r));
    std::size_t next_state = 0;
    std::size_t next_step = 0;
    if (ens.checkpoints[0] == 1) ens.states[r * nc + next_state++] = stepper.state();
    while (next_step < nc) {
      const int dir = stepper.step();
      const auto n = stepper.state().n;
      if (ens.checkpoints[next_step] == n - 1) {
        ens.next_dir[r * nc + next_step++] = static_cast<std::uint8_t>(dir);
      }
      if (next_state < nc && ens.checkpoints[next_state] == n) {
        ens.states[r * nc + next_state++] = stepper.state();
      }
    }
  });
  return ens;
}

}  // namespace merw
