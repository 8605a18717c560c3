// Kolmogorov-Smirnov distances and small distribution helpers.
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace merw {

double normal_cdf(double x);
double exp1_cdf(double x);

/// sup_t |F_emp(t) - cdf(t)| for a continuous cdf. Ties are handled exactly.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_one_sample_sorted(std::span<const double> sorted,
                            const std::function<double(double)>& cdf);

/// sup_t |F_a(t) - F_b(t)| over two empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Pearson statistic sum (obs - exp)^2 / exp and its upper-tail p-value.
struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};
ChiSquare chi_square_test(std::span<const double> observed, std::span<const double> expected);

}  // namespace merw
