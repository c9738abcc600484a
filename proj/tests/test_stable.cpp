#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lrp/stable.hpp"
#include "lrp/stats.hpp"

using namespace lrp;

namespace {

ModelParams law_params(double s, Coord L = 1 << 20) {
  ModelParams p;
  p.d = 1;
  p.s = s;
  p.beta = 1.0;
  p.L = L;
  return p;
}

}  // namespace

TEST_CASE("alpha = 2 reduces to a Gaussian of variance 2 scale^2") {
  Stream s(1, Role::stable);
  const auto x = sample_stable_1d(2.0, 100000, s, 1.5);
  const double v = variance(x);
  CHECK(std::fabs(v - 4.5) < 3.0 * 4.5 * std::sqrt(2.0 / 100000));
}

TEST_CASE("alpha = 1 is Cauchy: median and quartiles") {
  Stream s(2, Role::stable);
  const auto x = sample_stable_1d(1.0, 100000, s, 2.0);
  const double se_med = std::numbers::pi * 2.0 / (2.0 * std::sqrt(100000.0));
  CHECK(std::fabs(median(x)) < 3.0 * se_med);
  // Quartile standard error: sqrt(p(1-p)/n) / f(q), f(scale) = 1/(2 pi scale).
  const double se_q = std::sqrt(0.1875 / 100000) * 2.0 * std::numbers::pi * 2.0;
  CHECK(std::fabs(quantile(x, 0.75) - 2.0) < 3.0 * se_q);
  CHECK(std::fabs(quantile(x, 0.25) + 2.0) < 3.0 * se_q);
}

TEST_CASE("domain errors") {
  Stream s(3);
  CHECK_THROWS_AS(sample_stable_1d(0.0, 1, s), std::domain_error);
  CHECK_THROWS_AS(sample_stable_1d(2.5, 1, s), std::domain_error);
  CHECK_THROWS_AS(sample_isotropic_increment(2.0, 2, s), std::domain_error);
  CHECK_THROWS_AS(discrete_reference_path(law_params(0.9), 10, s), std::invalid_argument);
}

TEST_CASE("isotropic sampler agrees with the 1-d sampler in d = 1") {
  Stream a(4, Role::stable), b(5, Role::stable);
  std::vector<double> iso(100000);
  for (auto& x : iso) x = sample_isotropic_increment(1.3, 1, a)[0];
  const auto one = sample_stable_1d(1.3, 100000, b);
  CHECK(ks_two_sample(iso, one) < 0.01);
}

TEST_CASE("isotropic sampler: uniform angles and radial tail index") {
  Stream s(6, Role::stable);
  const int n = 200000;
  const int bins = 36;
  std::vector<double> counts(bins, 0.0);
  std::vector<double> radius(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = sample_isotropic_increment(0.8, 2, s);
    const double ang = std::atan2(x[1], x[0]) + std::numbers::pi;
    counts[std::min(bins - 1, static_cast<int>(ang / (2 * std::numbers::pi) * bins))] += 1.0;
    radius[i] = x.norm();
  }
  double chi = 0.0;
  for (double c : counts) chi += (c - n / double(bins)) * (c - n / double(bins)) / (n / double(bins));
  CHECK(chi_square_pvalue(chi, bins - 1) > 0.01);
  // Log-log survival slope over the top 1%..0.01% of radii.
  std::sort(radius.begin(), radius.end());
  std::vector<double> lx, ly;
  for (double tail : {1e-2, 3e-3, 1e-3, 3e-4}) {
    lx.push_back(std::log(quantile_sorted(radius, 1.0 - tail)));
    ly.push_back(std::log(tail));
  }
  CHECK(least_squares(lx, ly).slope == doctest::Approx(-0.8).epsilon(0.08));
}

TEST_CASE("continuous path: self-similarity, independence, symmetry") {
  const double alpha = 1.5;
  Stream s(7, Role::stable);
  const int n = 100000;
  std::vector<double> quarter(n), whole(n);
  for (int i = 0; i < n; ++i) {
    const StablePath p = sample_stable_path(alpha, 1, {0.0, 0.25, 1.0}, s);
    quarter[i] = p.values(0, 1);
  }
  for (int i = 0; i < n; ++i) {
    const StablePath p = sample_stable_path(alpha, 1, {0.0, 1.0}, s);
    whole[i] = std::pow(0.25, 1.0 / alpha) * p.values(0, 1);
  }
  CHECK(ks_two_sample(quarter, whole) < 0.01);

  std::vector<double> grid(n + 1);
  for (int i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) / n;
  const StablePath p = sample_stable_path(alpha, 1, grid, s);
  std::vector<double> inc(n);
  for (int i = 0; i < n; ++i) inc[i] = p.values(0, i + 1) - p.values(0, i);
  const double m = mean(inc);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    den += (inc[i] - m) * (inc[i] - m);
    if (i + 1 < n) num += (inc[i] - m) * (inc[i + 1] - m);
  }
  CHECK(std::fabs(num / den) < 3.0 / std::sqrt(double(n)));

  std::vector<double> x = sample_stable_1d(0.8, n, s), y = sample_stable_1d(0.8, n, s);
  for (auto& v : y) v = -v;
  CHECK(ks_two_sample(x, y) < 0.01);
}

TEST_CASE("lattice jump law: single jump matches the exact law") {
  const ModelParams p = law_params(1.8);
  const LatticeJumpLaw law(p, 5);
  Stream s(8, Role::reference);
  const int n = 200000;
  std::vector<double> counts(11, 0.0);
  for (int i = 0; i < n; ++i) {
    const WalkPath w = discrete_reference_path(p, 1, s, 5);
    counts[static_cast<std::size_t>(w.positions[1][0] + 5)] += 1.0;
  }
  CHECK(counts[5] == 0.0);
  double chi = 0.0;
  for (Coord y = -5; y <= 5; ++y) {
    if (y == 0) continue;
    const double e = n * law.probability(make_point(y));
    chi += (counts[static_cast<std::size_t>(y + 5)] - e) * (counts[static_cast<std::size_t>(y + 5)] - e) / e;
  }
  CHECK(chi_square_pvalue(chi, 9) > 0.01);
}

TEST_CASE("lattice jump law: tail sampler matches the law beyond the table") {
  // Tiny table forces almost every draw through the envelope/acceptance path.
  const ModelParams p = law_params(1.8);
  const LatticeJumpLaw tabled(p, 64, 64);
  const LatticeJumpLaw tail(p, 64, 4);
  Stream s(9, Role::reference);
  std::vector<std::int64_t> x;
  for (int i = 0; i < 200000; ++i) x.push_back(tail.sample(s)[0]);
  const double ks = ks_statistic_discrete(x, [&](std::int64_t k) {
    double c = 0.0;
    for (Coord y = -64; y <= std::min<Coord>(k, 64); ++y) {
      if (y != 0) c += tabled.probability(make_point(y));
    }
    return c;
  });
  CHECK(ks < 1.36 / std::sqrt(200000.0) * 1.5);

  // d = 2 sup-shell law.
  ModelParams q = p;
  q.d = 2;
  q.s = 2.5;
  const LatticeJumpLaw full(q, 20, 20), thin(q, 20, 3);
  std::vector<double> counts(21, 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(sup_norm(thin.sample(s), 2))] += 1.0;
  double chi = 0.0;
  for (Coord R = 1; R <= 20; ++R) {
    double mass = 0.0;
    for (std::uint64_t k = 0; k < shell_size(2, static_cast<std::uint64_t>(R)); ++k) mass += full.probability(shell_point(2, R, k));
    chi += (counts[R] - n * mass) * (counts[R] - n * mass) / (n * mass);
  }
  CHECK(chi_square_pvalue(chi, 19) > 0.01);
}

TEST_CASE("reference endpoints are self-similar under n^{1/alpha}") {
  const ModelParams p = law_params(1.8);
  const LatticeJumpLaw law(p, Coord{1} << 40);
  Stream s(10, Role::reference);
  const int m = 10000;
  std::vector<double> a(m), b(m);
  for (int i = 0; i < m; ++i) a[i] = discrete_reference_endpoint(law, 10000, s)[0] / std::pow(1e4, 1.25);
  for (int i = 0; i < m; ++i) b[i] = discrete_reference_endpoint(law, 100000, s)[0] / std::pow(1e5, 1.25);
  CHECK(ks_two_sample(a, b) < 0.02);
}

TEST_CASE("bernoulli field: exact marginals over shells") {
  ModelParams p = law_params(1.5);
  const int reps = 20000;
  std::vector<double> hits(41, 0.0);
  for (int r = 0; r < reps; ++r) {
    Stream s(11, Role::fixture, {static_cast<std::uint64_t>(r)});
    sample_bernoulli_field(p, 2, 20, s, [&](const Point& z) { hits[static_cast<std::size_t>(z[0] + 20)] += 1.0; });
  }
  for (Coord z = -20; z <= 20; ++z) {
    const double c = hits[static_cast<std::size_t>(z + 20)];
    if (std::llabs(z) <= 2) {
      CHECK(c == 0.0);
      continue;
    }
    const double q = connection_probability(static_cast<double>(std::llabs(z)), p);
    CHECK(std::fabs(c - reps * q) < 4.0 * std::sqrt(reps * q * (1 - q)));
  }
  // d = 2 with the Euclidean law uses thinning inside each shell.
  p.d = 2;
  p.s = 2.5;
  std::vector<double> hits2(9 * 9, 0.0);
  for (int r = 0; r < reps; ++r) {
    Stream s(12, Role::fixture, {static_cast<std::uint64_t>(r)});
    sample_bernoulli_field(p, 1, 4, s, [&](const Point& z) { hits2[static_cast<std::size_t>((z[0] + 4) * 9 + z[1] + 4)] += 1.0; });
  }
  for (Coord x = -4; x <= 4; ++x) {
    for (Coord y = -4; y <= 4; ++y) {
      const Point z = make_point(x, y);
      const double c = hits2[static_cast<std::size_t>((x + 4) * 9 + y + 4)];
      if (sup_norm(z, 2) <= 1) {
        CHECK(c == 0.0);
        continue;
      }
      const double q = edge_probability(z, p);
      CHECK(std::fabs(c - reps * q) < 4.0 * std::sqrt(reps * q * (1 - q)));
    }
  }
}
