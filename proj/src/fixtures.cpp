#include "lrp/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>

#include "lrp/environment.hpp"
#include "lrp/estimators.hpp"
#include "lrp/excursion.hpp"
#include "lrp/stats.hpp"

namespace lrp {

BallGraph random_ball(Stream& stream, int max_size, double extra, double exit_prob) {
  if (max_size < 2) throw std::invalid_argument("random_ball: need at least two vertices");
  const int n = 2 + static_cast<int>(stream.below(static_cast<std::uint64_t>(max_size - 1)));
  std::set<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.emplace(static_cast<int>(stream.below(static_cast<std::uint64_t>(v))), v);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (stream.uniform() < extra) edges.emplace(a, b);
    }
  }
  std::vector<int> exits(static_cast<std::size_t>(n), 0);
  for (int v = 1; v < n; ++v) exits[static_cast<std::size_t>(v)] = stream.uniform() < exit_prob ? 1 : 0;
  return BallGraph::from_edges(n, {edges.begin(), edges.end()}, exits);
}

std::pair<BallGraph, BallGraph> random_vstar_sides(Stream& stream, std::optional<std::int64_t> cap, int max_size,
                                                   double extra, double exit_prob) {
  auto draw = [&] {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      BallGraph g = random_ball(stream, max_size, extra, exit_prob);
      if (return_probability_exact(g, cap) < 1.0) return g;
    }
    throw std::invalid_argument("random_vstar_sides: no escapable ball drawn");
  };
  BallGraph a = draw();
  BallGraph b = draw();
  return {std::move(a), std::move(b)};
}

BallGraph path_ball(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return BallGraph::from_edges(n, e);
}

BallGraph star_ball(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return BallGraph::from_edges(leaves + 1, e);
}

BallGraph cycle_ball(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return BallGraph::from_edges(n, e);
}

BallGraph with_exits(BallGraph g, const std::vector<int>& exits) {
  if (static_cast<int>(exits.size()) != g.size()) throw std::invalid_argument("with_exits: size mismatch");
  g.exits = exits;
  return g;
}

namespace {

double wilson_half_width(double p, std::int64_t trials) {
  const auto successes = static_cast<std::int64_t>(std::llround(p * static_cast<double>(trials)));
  const Interval ci = wilson_interval(successes, trials);
  return 0.5 * (ci.hi - ci.lo);
}

struct Fixture {
  std::string name;
  int states = 0;
  // Runs every comparison of the fixture for one seed.
  std::function<std::vector<OracleComparison>(std::uint64_t seed, std::int64_t trials)> run;
};

OracleComparison compare(const std::string& fixture, const std::string& estimator, std::uint64_t seed, double exact,
                         double estimate, std::int64_t trials) {
  OracleComparison c{fixture, estimator, seed, exact, estimate, wilson_half_width(estimate, trials), false};
  c.pass = std::abs(estimate - exact) <= 3.0 * c.half_width + 1e-12;
  return c;
}

std::vector<Fixture> bundled_fixtures() {
  std::vector<Fixture> out;
  auto add_ball = [&](const std::string& name, const BallGraph& g) {
    bool absorbing = false;
    for (int e : g.exits) absorbing = absorbing || e > 0;
    out.push_back({name, g.size(), [g, name, absorbing](std::uint64_t seed, std::int64_t trials) {
                     std::vector<OracleComparison> cs;
                     std::vector<std::optional<std::int64_t>> caps{1, 2, 4, 8};
                     if (absorbing) caps.push_back(std::nullopt);
                     for (const auto& cap : caps) {
                       Stream s(seed, Role::trial, {cap ? static_cast<std::uint64_t>(*cap) : 0});
                       const McEstimate mc = return_probability_mc(g, cap, trials, s);
                       cs.push_back(compare(name, "local_return", seed, return_probability_exact(g, cap), mc.p, trials));
                     }
                     return cs;
                   }});
  };
  add_ball("path2", path_ball(2));
  add_ball("path3", path_ball(3));
  add_ball("path5", path_ball(5));
  add_ball("star3", star_ball(3));
  add_ball("cycle5", cycle_ball(5));
  add_ball("path4_exits", with_exits(path_ball(4), {0, 1, 0, 1}));
  add_ball("star4_exits", with_exits(star_ball(4), {0, 1, 0, 2, 0}));
  for (std::uint64_t i = 0; i < 8; ++i) {
    Stream s(0xF1, Role::fixture, {i});
    add_ball("random_ball" + std::to_string(i), random_ball(s));
  }

  auto add_env = [&](const std::string& name, ModelParams p, std::uint64_t env_seed) {
    const auto env = std::make_shared<Environment>(generate_environment(p, env_seed));
    out.push_back({name, static_cast<int>(env->vertex_count()), [env, name](std::uint64_t seed, std::int64_t trials) {
                     const std::vector<std::int64_t> t{2, 4, 8, 16};
                     const HeatKernelReport ex = heat_kernel_exact(*env, 0, t);
                     const HeatKernelReport mc = heat_kernel_mc(*env, 0, t, trials, seed);
                     std::vector<OracleComparison> cs;
                     for (std::size_t i = 0; i < ex.t.size(); ++i) {
                       const auto it = std::find(mc.t.begin(), mc.t.end(), ex.t[i]);
                       const double est = it == mc.t.end() ? 0.0 : mc.p[static_cast<std::size_t>(it - mc.t.begin())];
                       cs.push_back(compare(name, "heat_kernel", seed, ex.p[i], est, trials));
                     }
                     return cs;
                   }});
  };
  ModelParams p1;
  p1.d = 1;
  p1.s = 1.8;
  p1.L = 32;
  add_env("line32_s1.8", p1, 5);
  p1.s = 2.5;
  p1.L = 40;
  add_env("line40_s2.5", p1, 6);
  ModelParams p2;
  p2.d = 2;
  p2.s = 2.5;
  p2.L = 8;
  add_env("torus8x8_s2.5", p2, 7);

  for (std::uint64_t i = 0; i < 4; ++i) {
    Stream s(0xF2, Role::fixture, {i});
    const std::int64_t cap = 1 + static_cast<std::int64_t>(i);
    const auto [a, b] = random_vstar_sides(s, cap, 5, 0.2, 0.0);
    const std::string name = "vstar" + std::to_string(i);
    out.push_back({name, a.size() + b.size(), [a, b, cap, name](std::uint64_t seed, std::int64_t trials) {
                     Stream s(seed, Role::vstar);
                     const VStarReport r = simulate_vstar(a, b, cap, trials, s);
                     auto zero_rate = [](const std::vector<std::int64_t>& x) {
                       return static_cast<double>(std::count(x.begin(), x.end(), 0)) / static_cast<double>(x.size());
                     };
                     return std::vector<OracleComparison>{
                         compare(name, "excursion_count_v", seed, r.param_v, zero_rate(r.r_v), trials),
                         compare(name, "excursion_count_x", seed, r.param_x, zero_rate(r.r_x), trials)};
                   }});
  }
  return out;
}

}  // namespace

OracleReport oracle_equivalence(std::uint64_t seed, int seeds_per_fixture, std::int64_t trials) {
  OracleReport rep;
  for (const Fixture& f : bundled_fixtures()) {
    if (f.states > 2000) throw std::logic_error("oracle fixture exceeds 2000 states");
    rep.max_states = std::max(rep.max_states, f.states);
    for (int k = 0; k < seeds_per_fixture; ++k) {
      const std::uint64_t s = derive_key(seed, Role::fixture, {static_cast<std::uint64_t>(k)});
      const std::vector<OracleComparison> cs = f.run(s, trials);
      bool all = true;
      for (const auto& c : cs) all = all && c.pass;
      rep.comparisons.insert(rep.comparisons.end(), cs.begin(), cs.end());
      ++rep.pairs;
      rep.pairs_passing += all;
    }
  }
  rep.fraction = rep.pairs == 0 ? 0.0 : static_cast<double>(rep.pairs_passing) / static_cast<double>(rep.pairs);
  return rep;
}

}  // namespace lrp
