#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lrp {

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased
// Linear-interpolated empirical quantile (type 7); x need not be sorted.
double quantile(std::vector<double> x, double p);
double median(std::vector<double> x);
double quantile_sorted(std::span<const double> sorted, double p);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width() const { return 0.5 * (hi - lo); }
};

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

// sup |F_n - F|; F must be continuous or the caller accepts the conservative value.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
// KS distance against a discrete law on the integers given by its cdf at integer points.
double ks_statistic_discrete(std::span<const std::int64_t> sample, const std::function<double(std::int64_t)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
// Asymptotic Kolmogorov tail P(sqrt(n) D > lambda).
double kolmogorov_pvalue(double d, double n_effective);

double regularized_gamma_q(double a, double x);
double chi_square_pvalue(double statistic, double dof);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Percentile bootstrap over a statistic of index resamples.
Interval bootstrap_interval(std::size_t n, std::size_t resamples, std::uint64_t seed,
                            const std::function<double(const std::vector<std::size_t>&)>& statistic,
                            double level = 0.95);

}  // namespace lrp
