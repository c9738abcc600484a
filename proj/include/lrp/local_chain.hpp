#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrp/rng.hpp"
#include "lrp/stats.hpp"
#include "lrp/walk.hpp"

namespace lrp {

// absorb: edges leaving the ball kill the walk; reflect: they are dropped.
enum class BallRule { absorb, reflect };

// Small graph with root 0. Exit stubs count the edges that leave the ball.
struct BallGraph {
  std::vector<Point> offsets;
  std::vector<std::vector<int>> adj;
  std::vector<int> exits;

  int size() const { return static_cast<int>(adj.size()); }
  int local_degree(int u = 0) const { return static_cast<int>(adj[u].size()); }
  int total_degree(int u) const { return local_degree(u) + exits[u]; }

  static BallGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges, std::vector<int> exits = {});
};

template <WalkView V>
BallGraph build_ball(const V& view, const typename V::vertex_type& root, Coord radius, BallRule rule) {
  using Vx = typename V::vertex_type;
  BallGraph g;
  std::unordered_map<Point, int, PointHash> index;
  std::vector<Vx> verts{root};
  g.offsets.push_back(Point{});
  g.adj.emplace_back();
  g.exits.push_back(0);
  index.emplace(Point{}, 0);
  for (std::size_t head = 0; head < verts.size(); ++head) {
    const Vx u = verts[head];
    const Point base = g.offsets[head];
    const std::int64_t deg = view.degree(u);
    for (std::int64_t k = 0; k < deg; ++k) {
      auto [w, disp] = view.step(u, k);
      const Point off = base + disp;
      if (sup_norm(off, view.dimension()) > radius) {
        if (rule == BallRule::absorb) ++g.exits[head];
        continue;
      }
      auto [it, fresh] = index.emplace(off, static_cast<int>(verts.size()));
      if (fresh) {
        verts.push_back(w);
        g.offsets.push_back(off);
        g.adj.emplace_back();
        g.exits.push_back(0);
      }
      g.adj[head].push_back(it->second);
    }
  }
  return g;
}

// Probability that the walk from the root returns to it before leaving the ball
// (absorb rule) and within `cap` steps when a cap is given.
// Root without any neighbour: convention 1.
double return_probability_exact(const BallGraph& g, std::optional<std::int64_t> cap);

struct McEstimate {
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double p = 0.0;
  Interval ci;
};

McEstimate return_probability_mc(const BallGraph& g, std::optional<std::int64_t> cap, std::int64_t trials,
                                 Stream& stream);

}  // namespace lrp
