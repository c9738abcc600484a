#include "lrp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lrp/rng.hpp"

namespace lrp {

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, p);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_statistic_discrete(std::span<const std::int64_t> sample, const std::function<double(std::int64_t)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic_discrete: empty sample");
  std::vector<std::int64_t> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = cdf(s.front() - 1);
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    const double fn = static_cast<double>(j) / n;
    d = std::max(d, std::fabs(fn - cdf(s[i])));
    // F_n stays flat until the next sample value; check the point just before it.
    if (j < s.size() && s[j] - 1 > s[i]) d = std::max(d, std::fabs(fn - cdf(s[j] - 1)));
    i = j;
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_pvalue(double d, double n_effective) {
  const double sn = std::sqrt(n_effective);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::domain_error("regularized_gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Modified Lentz continued fraction.
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

double chi_square_pvalue(double statistic, double dof) { return regularized_gamma_q(0.5 * dof, 0.5 * statistic); }

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need two matched points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

Interval bootstrap_interval(std::size_t n, std::size_t resamples, std::uint64_t seed,
                            const std::function<double(const std::vector<std::size_t>&)>& statistic, double level) {
  std::vector<double> values;
  values.reserve(resamples);
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    Stream s(seed, Role::bootstrap, {b});
    for (auto& i : idx) i = static_cast<std::size_t>(s.below(n));
    values.push_back(statistic(idx));
  }
  std::sort(values.begin(), values.end());
  const double tail = 0.5 * (1.0 - level);
  return {quantile_sorted(values, tail), quantile_sorted(values, 1.0 - tail)};
}

}  // namespace lrp
