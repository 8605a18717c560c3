#include "merw/ks.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "merw/errors.hpp"

namespace merw {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double exp1_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

double ks_one_sample_sorted(std::span<const double> sorted,
                            const std::function<double(double)>& cdf) {
  if (sorted.empty()) throw ValidationError("KS statistic of an empty sample");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  return ks_one_sample_sorted(sample, cdf);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("KS statistic of an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

ChiSquare chi_square_test(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size()) throw ValidationError("chi-square size mismatch");
  ChiSquare out;
  int cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (expected[k] <= 0.0) {
      if (observed[k] > 0.0) {
        out.statistic = INFINITY;
        out.p_value = 0.0;
        return out;
      }
      continue;
    }
    const double diff = observed[k] - expected[k];
    out.statistic += diff * diff / expected[k];
    ++cells;
  }
  out.dof = cells - 1;
  if (out.dof < 1) return out;
  boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

}  // namespace merw
