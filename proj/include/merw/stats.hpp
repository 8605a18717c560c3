// Statistics harness: exact second-moment oracle, martingale normalisers,
// path statistics (zeros, exits, LIL ratios, escape, direction), axis
// occupation, normalised-CDF distances and the Lyapunov drift probe.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "merw/ensemble.hpp"
#include "merw/walk.hpp"

namespace merw {

// ---------------------------------------------------------------- exact moments

/// m_n = E||S_n||^2 for n = 0..n_max (m_0 = 0, m_1 = 1), from
/// m_{n+1} = (1 + 2a/n) m_n + 1.
std::vector<double> msd_exact(const WalkParams& params, std::int64_t n_max);

/// E S_n(1) for the one-dimensional walk: E S_{n+1} = (1 + (2p-1)/n) E S_n.
std::vector<double> mean_exact_1d(const Param& p, std::int64_t n_max);

struct CurvePoint {
  std::int64_t n = 0;
  double value = 0.0;
  double se = 0.0;
  double reference = 0.0;
  bool flagged = false;
};

struct CurveReport {
  std::vector<CurvePoint> points;
  bool pass = true;
};

/// Sample mean of ||S_n||^2 at every checkpoint against msd_exact; a point is
/// flagged when |mean - exact| > 4 se. Requires >= 100 replicas.
CurveReport msd_empirical(const ReplicaEnsemble& ens);

// ------------------------------------------------------------ martingale weights

class MartingaleWeights {
 public:
  explicit MartingaleWeights(const WalkParams& params);

  double a() const { return a_; }
  /// Start index of M: 2 when a = -1/2, 3 when a = -1, else 1.
  int start_index() const { return i_a_; }
  /// Gamma(n) Gamma(1+a) / Gamma(n+a); for a = -1 the constant is dropped
  /// and a_n = n - 1.
  double a_n(std::int64_t n) const;
  /// gamma_n: product of (1 + 2a/i) for i < n, or the special forms.
  double gamma_n(std::int64_t n) const;
  /// sum_{k<=n} a_k^2, computed by direct summation.
  double a_norm2(std::int64_t n) const;

 private:
  double a_;
  int i_a_;
  enum class Case { generic, half, one } case_;
};

struct MartingaleResidual {
  std::int64_t n = 0;
  MeanSe sbar;  ///< a_{n+1} S_{n+1}(1) - a_n S_n(1)
  MeanSe M;     ///< M_{n+1} - M_n (absent below the start index)
  MeanSe N;     ///< N_{n+1} - N_n
  bool has_M = false;
  bool pass = true;  ///< every available mean within 4 se of 0
};

struct MartingaleReport {
  std::vector<MartingaleResidual> points;
  std::optional<MeanSe> M_start;  ///< E M_{i_a}, when i_a is a checkpoint
  bool pass = true;
};

MartingaleReport martingale_residuals(const ReplicaEnsemble& ens);

// ------------------------------------------------------------- path statistics

struct PathStatsConfig {
  std::vector<std::int64_t> checkpoints;  ///< ascending
  double nu = 0.1;                        ///< escape exponent for ||S_n|| > n^nu
  std::int64_t sqrt_window_begin = 0;     ///< count ||S_n|| < sqrt(n)/log(n)^3 from here; 0 = off
  bool lil = false;
  bool critical_lil = false;  ///< n log n log log log max(n,16) normalisation
  bool direction = false;
};

/// Streaming path statistics, fed one state per step (n = 1, 2, ...).
class PathStats {
 public:
  static constexpr std::int64_t kLilStart = 16;

  explicit PathStats(const PathStatsConfig& cfg);

  void observe(const WalkState& s);
  void finish() {}

  /// Values recorded at each checkpoint.
  std::vector<std::int64_t> zeros;           ///< #{m <= n : S_m = 0}
  std::vector<double> exponent;              ///< log||S_n||^2 / log n (NaN if S_n = 0 or n = 1)
  std::vector<double> lil_max;               ///< running max of the LIL ratio (NaN before n = 16)
  std::vector<std::int64_t> escape_count;    ///< #{m <= n : ||S_m|| <= m^nu}
  std::vector<std::int64_t> last_escape;     ///< last such m (0 if none)
  std::vector<double> oscillation;           ///< max angle between S_m/|S_m| and S_{n/10}/|S_{n/10}|, m in [n/10, n]
  std::vector<std::vector<std::int64_t>> sign_changes;  ///< per checkpoint, per axis
  std::int64_t sqrt_violations = 0;

 private:
  const PathStatsConfig* cfg_;
  std::size_t next_ = 0;
  std::int64_t zero_count_ = 0;
  std::int64_t esc_count_ = 0;
  std::int64_t esc_last_ = 0;
  double esc_norm2_cap_ = 0.0;
  double lil_max_ = 0.0;
  bool lil_started_ = false;
  double lil_ref_denominator_ = 0.0;
  std::int64_t lil_ref_n_ = 0;
  std::vector<int> last_sign_;
  std::vector<std::int64_t> sign_change_count_;
  struct Window {
    std::int64_t begin = 0;
    std::vector<double> ref;  ///< empty until a nonzero S at or after begin
    double max_angle = 0.0;
  };
  std::vector<Window> windows_;

  void record_checkpoint(const WalkState& s);
  double lil_denominator(std::int64_t n) const;
};

PathStats path_stats(const Trajectory& t, const PathStatsConfig& cfg);

/// Zeros of the recorded positions (exact for stride 1).
std::int64_t count_zeros(const Trajectory& t);

struct ExitTime {
  std::int64_t zeta = 0;
  bool censored = false;
};

/// First n with ||S_n|| >= m on the walk (seed, stream_id), capped at `cap`.
ExitTime exit_time(const WalkParams& params, std::int64_t m, std::uint64_t seed,
                   std::uint32_t stream_id, std::int64_t cap = std::int64_t{1} << 30);
/// Same, from a recorded trajectory; empty when the walk never exits.
std::optional<std::int64_t> exit_time(const Trajectory& t, std::int64_t m);

struct ExitReport {
  std::int64_t m = 0;
  MeanSe zeta;
  std::int64_t censored = 0;
  double bound = 0.0;  ///< 6(m+1)^2
};

ExitReport exit_time_ensemble(const WalkParams& params, std::int64_t m, std::size_t replicas,
                              std::uint64_t seed, int workers);

// ------------------------------------------------------------ axis occupation

struct AxisPoint {
  std::int64_t n = 0;
  MeanSe abs_eta;      ///< E|eta_n(1)|
  MeanSe eta2;         ///< E eta_n(1)^2
  double exact_var = NAN;  ///< variance of eta_n(1) when p = 1/(2d)
  double max_sum_abs = 0.0;  ///< max over replicas of |sum_i eta_n(i)|
};

struct AxisReport {
  std::vector<AxisPoint> points;
  double fitted_exponent = 0.0;   ///< -slope of log E|eta| on log n
  double expected_exponent = 0.0;
  std::string expected_form;
};

/// Requires d >= 2 and p < 1.
AxisReport axis_occupation_error(const ReplicaEnsemble& ens);

// --------------------------------------------------------- normalised CDF distance

/// sqrt(3-4p) S_n / sqrt(n) for p < 3/4, S_n / sqrt(n log n) at p = 3/4.
/// Throws RegimeError unless d = 1 and p <= 3/4.
double normalize_position(const WalkParams& params, std::int64_t n, std::int64_t s);

/// KS distance of the normalised positions at checkpoint c to the standard
/// normal CDF.
double normalized_cdf_distance(const ReplicaEnsemble& ens, std::size_t c);

/// Exact law of S_n for the one-dimensional walk at each requested n
/// (ascending). Entry k of the returned vector is P(S_n = -n + 2k).
std::vector<std::vector<double>> erw_exact_laws(const Param& p,
                                                const std::vector<std::int64_t>& ns);

/// Sup distance between the exact normalised law of S_n and the normal CDF.
double normalized_cdf_distance_exact(const WalkParams& params, std::int64_t n,
                                     const std::vector<double>& law);

// ------------------------------------------------------------- drift probe

struct DriftBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t replicas = 0;  ///< replicas contributing at least one state
  std::int64_t states = 0;
  MeanSe scaled;  ///< corrected drift times 2||S||^2 log^{3/2}||S||, per-replica means
  bool skipped = false;
  bool pass = true;
};

struct DriftReport {
  std::string regime;  ///< "a<1/2" or "out of regime"
  std::vector<DriftBin> bins;
  bool pass = true;
};

/// Exact one-step drift of sqrt(log||x||) at every visited state with
/// n in [n_lo, n_hi], ||S_n|| > r and log||S_n|| sum_i |eta_n(i)| < 1/10,
/// minus a / (2 n sqrt(log||S_n||)). Requires d = 2.
DriftReport lyapunov_drift_probe(const WalkParams& params, std::int64_t n_lo, std::int64_t n_hi,
                                 double r, std::size_t replicas, std::uint64_t seed, int workers,
                                 std::size_t min_replicas = 10);

}  // namespace merw
