#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lrp/environment.hpp"
#include "lrp/walk.hpp"

using namespace lrp;

namespace {

ModelParams params1(Coord L, double s, double beta, bool nn = true, Boundary b = Boundary::torus) {
  ModelParams p;
  p.d = 1;
  p.L = L;
  p.s = s;
  p.beta = beta;
  p.nn_prob_one = nn;
  p.boundary = b;
  return p;
}

StepFunction from_values(std::vector<double> v) {
  StepFunction f;
  f.n = static_cast<std::int64_t>(v.size()) - 1;
  f.values.resize(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) f.values(0, static_cast<Eigen::Index>(i)) = v[i];
  return f;
}

}  // namespace

TEST_CASE("one step on the nearest-neighbour cycle is a fair coin") {
  const Environment env = generate_environment(params1(64, 2.5, 0.0), 1);
  int plus = 0;
  const int runs = 100000;
  for (int r = 0; r < runs; ++r) {
    const WalkPath p = run_walk(env, 10, 1, Stream(5, Role::walk, {static_cast<std::uint64_t>(r)}));
    const Coord step = p.positions[1][0] - p.positions[0][0];
    REQUIRE((step == 1 || step == -1));
    plus += step == 1;
  }
  CHECK(std::fabs(plus - runs / 2.0) < 3.0 * std::sqrt(runs * 0.25));
}

TEST_CASE("path fixture 0-1-2: middle vertex moves to either end") {
  const Environment env(params1(4, 2.5, 0.0, false, Boundary::free), 0, {{0, 1}, {1, 2}});
  int left = 0;
  const int runs = 20000;
  for (int r = 0; r < runs; ++r) {
    const WalkPath p = run_walk(env, 1, 1, Stream(9, Role::walk, {static_cast<std::uint64_t>(r)}));
    REQUIRE((p.positions[1][0] == 0 || p.positions[1][0] == 2));
    left += p.positions[1][0] == 0;
  }
  CHECK(std::fabs(left - runs / 2.0) < 3.0 * std::sqrt(runs * 0.25));
  CHECK_THROWS_AS(run_walk(env, 3, 5, Stream(1)), IsolatedStartError);
}

TEST_CASE("Markov check on a triangle fixture") {
  const Environment env(params1(4, 2.5, 0.0, false, Boundary::free), 0, {{0, 1}, {1, 2}, {0, 2}});
  const WalkPath p = run_walk(env, 0, 100000, Stream(3, Role::walk));
  std::array<std::array<double, 3>, 3> counts{};
  for (std::size_t i = 1; i < p.sites.size(); ++i) counts[p.sites[i - 1][0]][p.sites[i][0]] += 1.0;
  for (int a = 0; a < 3; ++a) {
    CHECK(counts[a][a] == 0.0);
    const double row = counts[a][0] + counts[a][1] + counts[a][2];
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      CHECK(std::fabs(counts[a][b] - row / 2) < 3.0 * std::sqrt(row * 0.25));
    }
  }
}

TEST_CASE("walk invariants: edges, new-vertex flags, jumps") {
  const Environment env = generate_environment(params1(5000, 1.8, 1.0), 12);
  for (std::uint64_t l = 0; l < 5; ++l) {
    const WalkPath p = run_walk(env, 0, 10000, Stream(4, Role::walk, {l}));
    REQUIRE(p.steps() == 10000);
    std::set<Point> seen;
    for (std::int64_t i = 0; i <= p.steps(); ++i) {
      CHECK(p.is_new[i] == (seen.count(p.sites[i]) == 0));
      seen.insert(p.sites[i]);
      if (i > 0) {
        CHECK(env.has_edge(env.id(p.sites[i - 1]), env.id(p.sites[i])));
        CHECK(env.torus().reduce(p.positions[i]) == p.sites[i]);
        CHECK(p.jump[i] == sup_norm(p.positions[i] - p.positions[i - 1], 1));
      }
    }
  }
}

TEST_CASE("no wraparound at diffusive scale") {
  const ModelParams prm = params1(100000, 2.5, 1.0);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Environment env = generate_environment(prm, 1000 + seed);
    const WalkPath p = run_walk(env, 0, 10000, Stream(seed, Role::walk));
    Coord m = 0;
    for (const auto& x : p.positions) m = std::max(m, sup_norm(x, 1));
    ok += 4 * m < prm.L;
  }
  CHECK(ok >= 99);
}

TEST_CASE("ensembles are keyed by walk index") {
  const Environment env = generate_environment(params1(4096, 1.8, 1.0), 3);
  const auto one = run_ensemble(env, 7, 500, 1, 42);
  const WalkPath direct = run_walk(env, 7, 500, Stream(42, Role::walk, {0}));
  CHECK(one[0].positions == direct.positions);
  const auto a = run_ensemble(env, 7, 500, 6, 42);
  const auto b = run_ensemble(env, 7, 500, 6, 42);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].positions == b[i].positions);
  CHECK(a[1].positions != a[2].positions);
}

TEST_CASE("pairwise vertex intersections grow sublinearly") {
  ModelParams prm = params1(1 << 20, 1.8, 1.0);
  const Environment env = generate_environment(prm, 8);
  std::vector<double> ratio;
  for (std::int64_t n : {256, 4096}) {
    const auto walks = run_ensemble(env, 0, n, 1000, 77);
    std::vector<std::vector<Point>> sets;
    for (const auto& w : walks) {
      std::vector<Point> s = w.sites;
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
      sets.push_back(std::move(s));
    }
    double total = 0.0;
    Stream pick(1, Role::selection);
    const int pairs = 2000;
    for (int k = 0; k < pairs; ++k) {
      const auto i = pick.below(sets.size());
      auto j = pick.below(sets.size() - 1);
      if (j >= i) ++j;
      std::vector<Point> common;
      std::set_intersection(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end(), std::back_inserter(common));
      total += static_cast<double>(common.size());
    }
    ratio.push_back(total / pairs / static_cast<double>(n));
    MESSAGE("n=" << n << " mean intersection / n = " << ratio.back());
  }
  CHECK(ratio[1] < ratio[0]);
}

TEST_CASE("degree-biased occupation on a small torus") {
  const Environment env = generate_environment(params1(64, 1.8, 1.0), 21);
  const std::int64_t T = 2000000;
  const WalkPath p = run_walk(env, 0, T, Stream(2, Role::walk));
  std::vector<double> occ(64, 0.0);
  for (std::size_t i = 1; i < p.sites.size(); ++i) occ[p.sites[i][0]] += 1.0;
  double two_e = 0.0;
  for (VertexId v = 0; v < 64; ++v) two_e += static_cast<double>(env.degree(v));
  for (VertexId v = 0; v < 64; ++v) {
    const double expected = static_cast<double>(env.degree(v)) / two_e;
    CHECK(std::fabs(occ[v] / static_cast<double>(T) - expected) < 0.1 * expected);
  }
}

TEST_CASE("rescale_path") {
  WalkPath p;
  p.d = 1;
  for (Coord i = 0; i <= 4; ++i) p.positions.push_back(make_point(i));
  StepFunction f = rescale_path(p, 1.0);
  for (int i = 0; i <= 4; ++i) CHECK(f.values(0, i) == doctest::Approx(i / 4.0));
  CHECK(f(0.3)[0] == doctest::Approx(0.25));
  StepFunction lin = rescale_path(p, 1.0, Interpolation::linear);
  CHECK(lin(0.3)[0] == doctest::Approx(0.3));

  WalkPath c;
  c.d = 1;
  c.positions.assign(10, Point{});
  CHECK(rescale_path(c, 0.5).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(rescale_path(p, 0.0), std::domain_error);

  const Environment env = generate_environment(params1(4096, 1.8, 1.0), 3);
  const WalkPath w = run_walk(env, 0, 999, Stream(1));
  const StepFunction g = rescale_path(w, 1.25);
  const double back = std::pow(999.0, 1.25);
  for (std::int64_t i = 0; i <= 999; ++i) CHECK(std::llround(g.values(0, i) * back) == w.positions[i][0]);
}

TEST_CASE("lq_distance examples") {
  const StepFunction zero = from_values({0, 0, 0});
  const StepFunction one = from_values({1, 1, 1});
  CHECK(lq_distance(one, one, 2.0) == 0.0);
  CHECK(lq_distance(zero, one, 2.0) == doctest::Approx(1.0));
  CHECK(lq_distance(from_values({2, 0, 0}), zero, 1.0) == doctest::Approx(1.0));
  CHECK(lq_distance(from_values({0, 3}), from_values({0, 0, 0}), 1.0) == doctest::Approx(0.0));
  // Incommensurate grids: f = 1 on [0, 1/3), g = 1 on [0, 1/2).
  CHECK(lq_distance(from_values({1, 0, 0, 0}), from_values({1, 0, 0}), 1.0) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(lq_distance(zero, one, 0.5), std::domain_error);
}

TEST_CASE("lq_distance is a homogeneous metric on random step functions") {
  Stream s(17, Role::fixture);
  for (int trial = 0; trial < 200; ++trial) {
    auto rnd = [&] {
      std::vector<double> v(2 + s.below(12));
      for (auto& x : v) x = 4.0 * s.uniform() - 2.0;
      return from_values(v);
    };
    const StepFunction f = rnd(), g = rnd(), h = rnd();
    const double q = 1.0 + 3.0 * s.uniform();
    CHECK(lq_distance(f, h, q) <= lq_distance(f, g, q) + lq_distance(g, h, q) + 1e-12);
    StepFunction f2 = f, g2 = g;
    f2.values *= 3.0;
    g2.values *= 3.0;
    CHECK(lq_distance(f2, g2, q) == doctest::Approx(3.0 * lq_distance(f, g, q)));
    CHECK(lq_distance(f, g, q) == doctest::Approx(lq_distance(g, f, q)));
  }
}

TEST_CASE("path CSV dump") {
  WalkPath p;
  p.d = 1;
  p.positions = {make_point(0), make_point(1)};
  p.is_new = {1, 1};
  p.jump = {0, 1};
  std::ostringstream out;
  write_path_csv(p, "{\"seed\":1}", out);
  CHECK(out.str() == "# {\"seed\":1}\ni,x1,new,jump\n0,0,1,0\n1,1,1,1\n");
}
