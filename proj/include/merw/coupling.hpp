// Shared-uniform pathwise couplings: two ERWs with ordered memory parameters,
// and one MERW together with any number of d-ERWs that share its axis choices.
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "merw/params.hpp"
#include "merw/walk.hpp"

namespace merw {

enum class DominanceRegime {
  erw_pair,
  merw_sandwich_low_p,
  merw_sandwich_high_p,
  derw_monotone,
  not_covered,
};

std::string_view to_string(DominanceRegime r);

struct Violation {
  std::int64_t n = 0;
  int axis = 0;  ///< 1-based
  std::vector<std::int64_t> values;
};

struct DominanceReport {
  DominanceRegime regime = DominanceRegime::not_covered;
  std::vector<Violation> violations;  ///< first kMaxRecorded only
  std::int64_t violation_count = 0;
  std::int64_t range_begin = 1;
  std::int64_t range_end = 0;

  static constexpr std::size_t kMaxRecorded = 64;
  bool covered() const { return regime != DominanceRegime::not_covered; }
  bool holds() const { return covered() && violation_count == 0; }
};

/// Sign rule shared by every coupled walk: from x != 0 move away from the
/// origin iff u < 1/2 + coeff |x|; from x == 0 step +1 iff u < 1/2.
inline int coupled_sign(std::int64_t x, double coeff, double u) {
  if (x == 0) return u < 0.5 ? 1 : -1;
  const double ax = static_cast<double>(x < 0 ? -x : x);
  const bool away = u < 0.5 + coeff * ax;
  const int s = x > 0 ? 1 : -1;
  return away ? s : -s;
}

/// Axis index whose half-open interval [sum_{j<i} c_j, sum_{j<=i} c_j)
/// contains u. Zero-mass axes are never selected.
int choose_axis(std::span<const double> c, double u);

/// Direction of the coupled MERW step from `state` given the shared axis
/// uniform and the uniform of the selected axis.
int coupled_merw_direction(const WalkState& state, double a, double p, double u_axis,
                           std::span<const double> u_signs);

struct ErwPair {
  Trajectory lower;  ///< parameter p1
  Trajectory upper;  ///< parameter p2
  DominanceReport report;
};

/// Throws ValidationError unless 0 <= p1 <= p2 <= 1.
ErwPair couple_erw_pair(const Param& p1, const Param& p2, std::int64_t n_max, std::uint64_t seed,
                        std::uint32_t stream_id = 0);

struct CouplingBundle {
  WalkParams params;  ///< d and p of the MERW
  std::vector<Param> q_list;
  std::int64_t n_max = 0;
  std::uint64_t seed = 0;
  std::uint32_t stream_id = 0;
  Trajectory merw;
  std::vector<Trajectory> derw;      ///< one per q, same order as q_list
  std::vector<std::int64_t> b_counts;  ///< n_max x d, shared axis counts b_n(i)
};

/// Lane 0 of (seed, stream_id) carries the axis uniforms U_n; lanes 1..d carry
/// the per-axis sign uniforms U_n^(i). Step n -> n+1 reads index n-1.
CouplingBundle couple_merw_derw(const WalkParams& params, std::vector<Param> q_list,
                                std::int64_t n_max, std::uint64_t seed,
                                std::uint32_t stream_id = 0);

/// Checks the pair (q_list[lo], q_list[hi]) against whichever coupling
/// inequality covers the (p, q_lo, q_hi) configuration.
DominanceReport verify_dominance(const CouplingBundle& bundle, std::size_t lo = 0,
                                 std::size_t hi = 1);

/// Per-axis ERW paths X^(i)_1..X^(i)_{b(i)} of the d-ERW member q_index.
std::vector<std::vector<std::int64_t>> decompose_derw(const CouplingBundle& bundle,
                                                      std::size_t q_index);

}  // namespace merw
