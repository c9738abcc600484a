#include <cmath>

#include "doctest.h"
#include "lrp/excursion.hpp"
#include "lrp/stats.hpp"

using namespace lrp;

namespace {

// Root 0 joined to a path of `n - 1` further vertices.
BallGraph path_ball(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return BallGraph::from_edges(n, e);
}

}  // namespace

TEST_CASE("excursion parameter examples") {
  CHECK(excursion_parameter(0.0, 1) == doctest::Approx(0.5));
  CHECK(excursion_parameter(0.0, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(excursion_parameter(0.5, 4) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(excursion_parameter(1.0, 3), DegenerateParameterError);
  CHECK_THROWS_AS(excursion_parameter(0.2, 0), DegenerateParameterError);
  CHECK_THROWS_AS(excursion_parameter(1.5, 1), std::domain_error);
  CHECK(excursion_parameter_or_zero(1.0, 3) == 0.0);
}

TEST_CASE("geometric stream: edge values, mean, monotone coupling") {
  GeomStream g(7, Role::fixture, {1});
  CHECK(g.value(1.0) == 0);
  CHECK_THROWS_AS(g.value(0.0), std::domain_error);

  Stream root(8, Role::fixture);
  double sum = 0.0;
  std::vector<std::int64_t> sample;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    GeomStream s(root.split(static_cast<std::uint64_t>(i)));
    const std::int64_t a = s.value(0.5);
    const std::int64_t b = s.value(0.3);
    CHECK_MESSAGE(b >= a, "smaller parameter must give a larger count on the same uniforms");
    sum += static_cast<double>(a);
    sample.push_back(a);
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
  const double ks = ks_statistic_discrete(sample, [](std::int64_t r) { return 1.0 - std::pow(0.5, r + 1.0); });
  CHECK(ks < 0.01);

  GeomStream capped(9, Role::fixture, {2});
  CHECK(capped.value(1e-9, 5) == 5);
}

TEST_CASE("geometric race closed form") {
  CHECK(geometric_exceeds(0.5, 0.5) == doctest::Approx(1.0 / 3.0));
  Stream s(10, Role::fixture);
  int wins = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    GeomStream a(s.split(2 * static_cast<std::uint64_t>(i)));
    GeomStream b(s.split(2 * static_cast<std::uint64_t>(i) + 1));
    wins += a.value(0.3) > b.value(0.6);
  }
  const double p = geometric_exceeds(0.3, 0.6);
  CHECK(std::abs(wins / static_cast<double>(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("V* with single-edge balls and cap 1: Geom(1/2) counts, side and parity agree") {
  const BallGraph edge = path_ball(2);
  Stream s(11, Role::fixture);
  const VStarReport r = simulate_vstar(edge, edge, 1, 100000, s);
  CHECK(r.types.p_v == 0.0);
  CHECK(r.types.d_v == 1);
  CHECK(r.param_v == doctest::Approx(0.5));
  CHECK(r.ks_v < 0.01);
  CHECK(r.ks_x < 0.01);
  CHECK(r.well_defined == r.trials);
  CHECK(r.side_agree == r.well_defined);
  CHECK(r.parity_agree == r.well_defined);
}

TEST_CASE("V* with path balls and longer cap matches the exact excursion parameter") {
  const BallGraph a = path_ball(4);
  const BallGraph b = path_ball(3);
  Stream s(12, Role::fixture);
  const VStarReport r = simulate_vstar(a, b, 6, 100000, s);
  CHECK(r.types.p_v > 0.0);
  CHECK(r.param_v == doctest::Approx(excursion_parameter(r.types.p_v, 1)));
  CHECK(r.ks_v < 0.01);
  CHECK(r.ks_x < 0.01);
  CHECK(r.side_agree == r.well_defined);
  CHECK(r.parity_agree == r.well_defined);
}

TEST_CASE("disconnected ball is rejected") {
  const BallGraph bad = BallGraph::from_edges(3, {{0, 1}});
  Stream s(13, Role::fixture);
  CHECK_THROWS_AS(simulate_vstar(bad, path_ball(2), 1, 10, s), std::invalid_argument);
}

TEST_CASE("coupled V* walk: prescribed crossings before the first escape") {
  const VStar g = join_balls(path_ball(3), path_ball(3));
  Stream s(14, Role::fixture);
  for (std::int64_t rv = 0; rv < 4; ++rv) {
    for (std::int64_t rx = 0; rx < 4; ++rx) {
      const CoupledVStarWalk w = coupled_vstar_walk(g, rv, rx, 2, 10000, s);
      REQUIRE(w.tau_star >= 0);
      // The first root to run out of crossings escapes: v if rv <= rx.
      CHECK(w.x_side_at_tau_star == (rv > rx));
      CHECK(w.crossings == (rv > rx ? 2 * rx + 1 : 2 * rv));
      CHECK(w.y.front() == g.v());
      for (std::size_t t = 1; t < w.y.size(); ++t) {
        const std::vector<int> nb = g.neighbours(w.y[t - 1]);
        CHECK(std::find(nb.begin(), nb.end(), w.y[t]) != nb.end());
      }
    }
  }
}
