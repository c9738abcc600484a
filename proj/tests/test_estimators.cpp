#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "lrp/estimators.hpp"
#include "lrp/stable.hpp"

using namespace lrp;

namespace {

ModelParams params1(Coord L, double s, double beta, Boundary b = Boundary::torus) {
  ModelParams p;
  p.d = 1;
  p.L = L;
  p.s = s;
  p.beta = beta;
  p.boundary = b;
  return p;
}

// Hitting probability of `target` before `avoid` by brute-force value iteration on a dense kernel.
double iterate_hit(const Eigen::MatrixXd& P, int start, int target, const std::vector<int>& avoid) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(P.rows());
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd next = P * h;
    next[target] = 1.0;
    for (int a : avoid) next[a] = 0.0;
    if ((next - h).cwiseAbs().maxCoeff() < 1e-15) break;
    h = next;
  }
  return h[start];
}

}  // namespace

TEST_CASE("hill: exact Pareto(1)") {
  Stream s(1, Role::fixture);
  std::vector<double> x(1000000);
  for (auto& v : x) v = 1.0 / s.uniform();
  const TailEstimate t = hill_tail_index(x, 0.01, 50, 3);
  CHECK(t.alpha_hat == doctest::Approx(1.0).epsilon(0.02));
  CHECK(t.k == 10000);
  CHECK(t.ci_half_width > 0.0);
  CHECK(t.ci_half_width < 0.05);
}

TEST_CASE("hill: degenerate and invalid inputs") {
  std::vector<double> c(500, 3.0);
  CHECK_THROWS_AS(hill_tail_index(c, 0.01, 0), std::domain_error);
  std::vector<double> bad(500, 1.0);
  bad[7] = -1.0;
  CHECK_THROWS_AS(hill_tail_index(bad, 0.01, 0), std::domain_error);
  CHECK_THROWS_AS(hill_tail_index(std::vector<double>(50, 1.0), 0.01, 0), std::invalid_argument);
  CHECK_THROWS_AS(hill_tail_index(std::vector<double>(500, 1.0), 0.5, 0), std::domain_error);
}

TEST_CASE("hill: exponential body with Pareto(0.8) tail") {
  Stream s(2, Role::fixture);
  std::vector<double> x(1000000), tail;
  for (auto& v : x) {
    if (s.uniform() < 0.1) {
      v = 10.0 * std::pow(s.uniform(), -1.0 / 0.8);
      tail.push_back(v);
    } else {
      v = s.exponential();
    }
  }
  const TailEstimate mix = hill_tail_index(x, 0.01, 0);
  CHECK(mix.alpha_hat == doctest::Approx(0.8).epsilon(0.05 / 0.8));
  // Tail-only resampling sees the same top order statistics.
  const TailEstimate only = hill_tail_index(tail, 0.1, 0);
  CHECK(std::fabs(mix.alpha_hat - only.alpha_hat) < 0.05);
  const auto sweep = hill_sensitivity(x, {0.002, 0.005, 0.01}, 0);
  for (const auto& e : sweep) CHECK(std::fabs(e.alpha_hat - 0.8) < 0.1);
}

TEST_CASE("hill on symmetric 0.8-stable magnitudes") {
  Stream s(3, Role::stable);
  auto x = sample_stable_1d(0.8, 1000000, s);
  for (auto& v : x) v = std::fabs(v);
  const TailEstimate t = hill_tail_index(x, 0.01, 0);
  CHECK(std::fabs(t.alpha_hat - 0.8) < 0.05);
}

TEST_CASE("scaling exponent examples") {
  const std::vector<double> grid{16, 32, 64, 128, 256, 512};
  auto det = [](std::int64_t n, std::size_t) { return static_cast<double>(n); };
  const ScalingFit one = scaling_exponent(det, grid, 5, ScalingStatistic::median, 20);
  CHECK(one.slope == doctest::Approx(1.0));
  CHECK_FALSE(one.short_span);

  auto pm = [](std::int64_t n, std::size_t w) {
    Stream s(4, Role::walk, {static_cast<std::uint64_t>(n), w});
    std::int64_t x = 0;
    for (std::int64_t i = 0; i < n; ++i) x += (s() & 1) ? 1 : -1;
    return static_cast<double>(x);
  };
  const ScalingFit half = scaling_exponent(pm, {256, 512, 1024, 2048, 4096, 8192}, 1000, ScalingStatistic::rms, 100, 5);
  CHECK(std::fabs(half.slope - 0.5) < 0.03);
  CHECK(half.ci.lo < half.slope);
  CHECK(half.ci.hi > half.slope);

  CHECK_THROWS_AS(scaling_exponent(det, {1, 2}, 3, ScalingStatistic::median), std::invalid_argument);
  CHECK(scaling_exponent(det, {1, 2, 4}, 3, ScalingStatistic::median, 0).short_span);
}

TEST_CASE("scaling exponent of the 0.8-stable reference walk") {
  ModelParams p = params1(1 << 20, 1.8, 1.0);
  const LatticeJumpLaw law(p, Coord{1} << 40);
  auto f = [&](std::int64_t n, std::size_t w) {
    Stream s(6, Role::reference, {static_cast<std::uint64_t>(n), w});
    return static_cast<double>(discrete_reference_endpoint(law, n, s)[0]);
  };
  const ScalingFit fit = scaling_exponent(f, {256, 512, 1024, 2048, 4096, 8192}, 1000, ScalingStatistic::median, 50);
  CHECK(std::fabs(fit.slope - 1.25) < 0.1);
}

TEST_CASE("local return: path, star and caps") {
  Stream s(7);
  const BallGraph path = BallGraph::from_edges(2, {{0, 1}});
  CHECK(local_return(path, std::nullopt, ReturnMode::exact, 0, s).p == doctest::Approx(1.0));
  CHECK(local_return(path, 2, ReturnMode::exact, 0, s).p == doctest::Approx(1.0));
  CHECK(local_return(path, 1, ReturnMode::exact, 0, s).p == 0.0);

  // Star: centre 0 with leaves 1..4; leaf i carries i - 1 absorbing exit stubs.
  const BallGraph star = BallGraph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, {0, 0, 1, 2, 3});
  double closed = 0.0;
  for (int e = 0; e < 4; ++e) closed += 0.25 / (1.0 + e);
  CHECK(local_return(star, std::nullopt, ReturnMode::exact, 0, s).p == doctest::Approx(closed));
  CHECK(local_return(star, 2, ReturnMode::exact, 0, s).p == doctest::Approx(closed));
  const LocalReturn mc = local_return(star, std::nullopt, ReturnMode::monte_carlo, 100000, s);
  CHECK_FALSE(mc.exact);
  CHECK(std::fabs(mc.p - closed) < 3.0 * mc.ci.half_width());

  const BallGraph lone = BallGraph::from_edges(1, {});
  const LocalReturn iso = local_return(lone, 4, ReturnMode::exact, 0, s);
  CHECK(iso.no_local_neighbours);
  CHECK(iso.p == 1.0);
  CHECK(iso.d_tilde == 0);
}

TEST_CASE("local return: Monte Carlo agrees with exact solves on random balls") {
  const Environment env = generate_environment(params1(1 << 14, 1.8, 1.0), 31);
  const EnvironmentView view{&env};
  int agree = 0;
  const int balls = 50;
  for (int b = 0; b < balls; ++b) {
    Stream pick(8, Role::selection, {static_cast<std::uint64_t>(b)});
    const auto v = static_cast<VertexId>(pick.below(static_cast<std::uint64_t>(env.vertex_count())));
    Stream mcs(9, Role::trial, {static_cast<std::uint64_t>(b)});
    const LocalReturn ex = return_probabilities(view, v, 8, std::nullopt, ReturnMode::exact, BallRule::absorb, 0, mcs);
    const LocalReturn mc =
        return_probabilities(view, v, 8, std::nullopt, ReturnMode::monte_carlo, BallRule::absorb, 20000, mcs);
    CHECK(ex.ball_size <= 17);
    CHECK(ex.d_tilde == mc.d_tilde);
    agree += std::fabs(ex.p - mc.p) <= 3.0 * mc.ci.half_width();
  }
  CHECK(agree >= 48);
}

TEST_CASE("type grid") {
  const TypeGrid g({0.2, 0.5, 0.9});
  CHECK(g.J() == 3);
  CHECK(g.cells() == 10);
  CHECK(g.classify(0.0, 1) == std::pair{1, 1});
  CHECK(g.classify(0.2, 2) == std::pair{2, 2});
  CHECK(g.classify(0.7, 3) == std::pair{3, 3});
  CHECK(g.classify(0.95, 1) == std::pair{0, 0});
  CHECK(g.classify(0.1, 4) == std::pair{0, 0});
  CHECK(g.classify(0.1, 0) == std::pair{0, 0});
  for (int c = 0; c < g.cells(); ++c) {
    auto [j, m] = g.type_of_cell(c);
    CHECK(g.cell(j, m) == c);
  }
  CHECK(g.psi() == doctest::Approx(10.0 - 2.0));
  CHECK_THROWS_AS(TypeGrid({0.5, 0.4}), std::invalid_argument);

  // Heavy atoms at 0 and 0.5: grid points must avoid them and stay increasing.
  std::vector<double> p(1000, 0.0);
  for (int i = 600; i < 1000; ++i) p[i] = 0.5;
  const TypeGrid q = quantile_grid(p, 8);
  CHECK(q.atom_mass(p) == 0.0);
  for (int j = 1; j <= 8; ++j) CHECK(q.q(j) > q.q(j - 1));
}

TEST_CASE("new-vertex rates: fixtures") {
  WalkPath line;
  line.d = 1;
  for (Coord i = 0; i <= 100; ++i) {
    line.positions.push_back(make_point(i));
    line.sites.push_back(make_point(i));
    line.is_new.push_back(1);
    line.jump.push_back(i ? 1 : 0);
  }
  const TypeGrid grid({0.5});
  const RateReport r = new_vertex_rates({line, line}, [](const Point&) { return VertexType{0.1, 1}; }, grid, 0.05);
  CHECK(r.n_t[0] == 100);
  CHECK(r.c_star == doctest::Approx(1.0));
  CHECK(r.c_cell[grid.cell(1, 1)] == doctest::Approx(1.0));
  CHECK(r.c_bar == 0.0);
  CHECK(r.fraction_passing == 1.0);
  CHECK_THROWS_AS(new_vertex_rates({line}, [](const Point&) { return VertexType{}; }, TypeGrid(), 0.05),
                  std::invalid_argument);

  // Recurrent nearest-neighbour walk: the plateau N_t/t keeps falling.
  const Environment env = generate_environment(params1(1 << 20, 2.5, 0.0), 1);
  const auto walks = run_ensemble(env, 0, 1 << 16, 20, 3);
  const RateReport nn = new_vertex_rates(walks, [](const Point&) { return VertexType{0.0, 2}; }, TypeGrid({0.5, 0.9}), 0.05);
  CHECK(nn.c_star < 0.02);
  for (std::size_t h = 4; h < nn.plateau.size(); ++h) CHECK(nn.plateau[h] < nn.plateau[h - 1]);
}

TEST_CASE("new-vertex rates: transient long-range walk") {
  const Environment env = generate_environment(params1(1 << 20, 1.8, 1.0), 5);
  const auto walks = run_ensemble(env, 0, 1 << 14, 20, 11);
  auto type_of = [&](const Point& x) {
    Stream unused(0);
    const LocalReturn r = return_probabilities(EnvironmentView{&env}, env.id(x), 2, std::int64_t{2},
                                               ReturnMode::exact, BallRule::reflect, 0, unused);
    return VertexType{r.p, r.d_tilde};
  };
  const RateReport r = new_vertex_rates(walks, type_of, TypeGrid({0.2, 0.4, 0.6, 0.8}), 0.05);
  CHECK(r.c_star > 0.1);
  double typed = 0.0;
  for (std::size_t c = 1; c < r.c_cell.size(); ++c) typed += r.c_cell[c];
  CHECK(typed + r.c_bar == doctest::Approx(r.c_star));
  for (std::size_t l = 0; l < walks.size(); ++l) {
    std::int64_t sum = 0;
    for (auto c : r.cells[l]) sum += c;
    CHECK(sum == r.n_t[l]);
  }
  MESSAGE("C* = " << r.c_star << ", max rel dev = " << r.max_relative_deviation << ", H pass = " << r.fraction_passing);
}

TEST_CASE("heat kernel: exact iteration matches matrix powers") {
  const Environment env(params1(9, 2.5, 0.0, Boundary::torus), 0, {{0, 4}, {2, 7}});
  const int n = 9;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    for (std::int64_t k = 0; k < env.degree(v); ++k) P(v, env.neighbor(v, k)) += 1.0 / static_cast<double>(env.degree(v));
  }
  const HeatKernelReport r = heat_kernel_exact(env, 0, {2, 4, 8, 16});
  CHECK_FALSE(r.bipartite);
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  std::vector<double> ret(18);
  for (int t = 0; t < 18; ++t) {
    ret[t] = M(0, 0);
    M = M * P;
  }
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    const auto t = static_cast<std::size_t>(r.t[i]);
    CHECK(r.p[i] == doctest::Approx(0.5 * (ret[t] + ret[t + 1])).epsilon(1e-12));
  }
}

TEST_CASE("heat kernel: nearest-neighbour line has slope -1/2 on even times") {
  const Environment env = generate_environment(params1(1 << 14, 2.5, 0.0), 1);
  const HeatKernelReport r = heat_kernel_exact(env, 0, {63, 64, 128, 256, 512, 1024, 2048, 4096});
  CHECK(r.bipartite);
  CHECK(r.t.front() == 64);  // odd t dropped
  CHECK(std::fabs(r.slope + 0.5) < 0.05);
  // Local CLT: P_{2n}(0,0) ~ 1/sqrt(pi n).
  CHECK(r.p.back() == doctest::Approx(1.0 / std::sqrt(3.141592653589793 * 2048)).epsilon(0.01));

  const HeatKernelReport mc = heat_kernel_mc(env, 0, {16, 32, 64, 128}, 20000, 3);
  CHECK(mc.bipartite);
  CHECK(std::fabs(mc.slope + 0.5) < 0.1);
  CHECK_THROWS_AS(heat_kernel_mc(env, 0, {4096}, 3, 1), ZeroReturnsError);
}

TEST_CASE("heat kernel: window truncation reports boundary mass") {
  const Environment env = generate_environment(params1(1 << 12, 1.8, 1.0), 2);
  const HeatKernelReport full = heat_kernel_exact(env, 0, {8, 16, 32});
  const HeatKernelReport cut = heat_kernel_exact(env, 0, {8, 16, 32}, 64);
  CHECK(full.boundary_mass == 0.0);
  CHECK(cut.window_vertices == 129);
  CHECK(cut.boundary_mass > 0.0);
}

TEST_CASE("small jump mass") {
  WalkPath big;
  big.d = 1;
  for (int i = 0; i <= 10; ++i) {
    big.positions.push_back(make_point(5 * i));
    big.jump.push_back(i ? 5 : 0);
  }
  CHECK(small_jump_mass(big, 2, 0.8) == 0.0);
  CHECK_THROWS_AS(small_jump_mass(big, 0, 0.8), std::domain_error);

  const Environment env = generate_environment(params1(1 << 16, 2.5, 0.0), 1);
  const auto walks = run_ensemble(env, 0, 1 << 12, 3, 2);
  for (std::int64_t n : {256, 1024, 4096}) {
    CHECK(small_jump_mass(walks[0], 2, 0.8, n) == doctest::Approx(std::pow(static_cast<double>(n), -0.25)));
  }
  const SmallJumpTrend tr = small_jump_trend(walks, 2, 0.8, {256, 1024, 4096});
  CHECK(tr.strictly_decreasing);
  CHECK(tr.ratio == doctest::Approx(std::pow(16.0, -0.25)));
}

TEST_CASE("jump-sum tail envelope") {
  Stream s(12, Role::fixture);
  std::vector<double> bounded(10000);
  for (auto& v : bounded) v = 0.5 * s.uniform();
  CHECK(zmax_tail_check(bounded, 0.8).degenerate);

  // Reference walk: normalized sums of |jumps|.
  const ModelParams p = params1(1 << 20, 1.8, 1.0);
  const LatticeJumpLaw law(p, Coord{1} << 40);
  const std::int64_t n = 1024;
  std::vector<double> sums(10000);
  for (std::size_t c = 0; c < sums.size(); ++c) {
    Stream r(13, Role::reference, {c});
    double t = 0.0;
    for (std::int64_t i = 0; i < n; ++i) t += static_cast<double>(std::llabs(law.sample(r)[0]));
    sums[c] = t * std::pow(static_cast<double>(n), -1.25);
  }
  const ZmaxReport ok = zmax_tail_check(sums, 0.8);
  CHECK_FALSE(ok.degenerate);
  CHECK(ok.c > 0.0);
  CHECK(ok.check_hi > 10.0);
  CHECK(ok.violations == 0);
  const ZmaxReport wrong = zmax_tail_check(sums, 1.6);
  CHECK(wrong.violations > 0);
}

TEST_CASE("cutpoint chain: nearest-neighbour line") {
  const Environment env = generate_environment(params1(50, 2.5, 0.0, Boundary::free), 1);
  const CutpointChain ch = cutpoint_chain(env);
  CHECK(ch.cutpoints.size() == 48);  // the two end vertices have degree 1
  for (double q : ch.q_forward) CHECK(q == doctest::Approx(0.5));
  for (double q : ch.q_stay) CHECK(q == doctest::Approx(0.0));
  CHECK(ch.mean_p_spacing == doctest::Approx(2.0));
  CHECK(ch.k_star == doctest::Approx(1.0));
  CHECK(ch.quadratic_variation == doctest::Approx(4.0));
}

TEST_CASE("cutpoint chain: explicit six-vertex gap") {
  // Gap [1, 6] with interior shortcuts {2,4} and {3,5}.
  const Environment env(params1(8, 2.5, 1.0, Boundary::free), 0, {{2, 4}, {3, 5}});
  const CutpointChain ch = cutpoint_chain(env);
  REQUIRE(ch.cutpoints == std::vector<Coord>{1, 6});
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(8, 8);
  for (int v = 0; v < 8; ++v) {
    for (std::int64_t k = 0; k < env.degree(v); ++k) P(v, env.neighbor(v, k)) += 1.0 / static_cast<double>(env.degree(v));
  }
  // From 1: first step, then hit 6 before coming back to 1 (0 is only reachable through 1).
  const double fwd = 0.5 * iterate_hit(P, 2, 6, {1});
  const double bwd = 0.5 * iterate_hit(P, 5, 1, {6});
  CHECK(ch.q_forward[0] == doctest::Approx(fwd).epsilon(1e-10));
  CHECK(ch.q_backward[0] == doctest::Approx(bwd).epsilon(1e-10));
  CHECK(std::fabs(ch.q_forward[0] - ch.q_backward[0]) < 1e-10);
  CHECK(1.0 / ch.q_forward[0] <= 2.0 * 5);
}

TEST_CASE("cutpoint chain: symmetry and resistance bound on random environments") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Environment env = generate_environment(params1(20000, 2.5, 1.0), 100 + seed);
    const CutpointChain ch = cutpoint_chain(env);
    CHECK(ch.cyclic);
    CHECK(ch.max_symmetry_error < 1e-10);
    CHECK(ch.resistance_bound);
    for (double q : ch.q_stay) CHECK(q >= -1e-12);
    CHECK(ch.k_star > 0.0);
    CHECK(ch.k_star >= ch.mean_gap * (1.0 - 1e-12));  // spacings are at most twice the gaps
  }
}

TEST_CASE("variance diffusivity on the nearest-neighbour cycle is 1") {
  const Environment env = generate_environment(params1(1 << 16, 2.5, 0.0), 1);
  const DiffusivityFit f = variance_diffusivity(env, {256, 512, 1024, 2048}, 4000, 9);
  CHECK(f.sigma2 == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("marginal comparison") {
  const std::vector<double> t{0.25, 0.5, 1.0};
  Stream a(20, Role::stable), b(21, Role::stable), c(22, Role::stable);
  Eigen::MatrixXd x(5000, 3), y(5000, 3), g(5000, 3);
  for (int i = 0; i < 5000; ++i) {
    const StablePath p = sample_stable_path(0.8, 1, {0.0, 0.25, 0.5, 1.0}, a);
    const StablePath q = sample_stable_path(0.8, 1, {0.0, 0.25, 0.5, 1.0}, b);
    const StablePath r = sample_stable_path(2.0 - 1e-9, 1, {0.0, 0.25, 0.5, 1.0}, c);
    for (int k = 0; k < 3; ++k) {
      x(i, k) = p.values(0, k + 1);
      y(i, k) = q.values(0, k + 1);
      g(i, k) = r.values(0, k + 1);
    }
  }
  const MarginalComparison same = marginal_compare(x, y, t, 1.0);
  int inside = 0;
  for (std::size_t k = 0; k < 3; ++k) inside += same.ks[k] < same.ks_critical[k];
  CHECK(inside >= 2);
  const MarginalComparison diff = marginal_compare(x, g, t, 1.0);
  for (std::size_t k = 0; k < 3; ++k) CHECK(diff.ks[k] > 3.0 * diff.ks_critical[k]);
  CHECK(diff.lq_quantile > same.lq_quantile);
  CHECK_THROWS_AS(marginal_compare(x, y, {0.0, 0.5, 1.0}, 1.0), std::domain_error);
  CHECK_THROWS_AS(marginal_compare(x, y, {0.25, 0.5, 1.5}, 1.0), std::domain_error);
}
