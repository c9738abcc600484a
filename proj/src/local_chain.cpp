#include "lrp/local_chain.hpp"

#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace lrp {

BallGraph BallGraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges, std::vector<int> exits) {
  BallGraph g;
  g.offsets.assign(static_cast<std::size_t>(n), Point{});
  g.adj.assign(static_cast<std::size_t>(n), {});
  g.exits = exits.empty() ? std::vector<int>(static_cast<std::size_t>(n), 0) : std::move(exits);
  if (static_cast<int>(g.exits.size()) != n) throw std::invalid_argument("BallGraph: exits size mismatch");
  for (auto [a, b] : edges) {
    if (a == b || a < 0 || b < 0 || a >= n || b >= n) throw std::invalid_argument("BallGraph: bad edge");
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  return g;
}

double return_probability_exact(const BallGraph& g, std::optional<std::int64_t> cap) {
  const int n = g.size();
  const int root_deg = g.total_degree(0);
  if (g.local_degree(0) == 0) return 1.0;
  if (cap) {
    if (*cap < 1) throw std::domain_error("return_probability_exact: cap must be >= 1");
    std::vector<double> mass(static_cast<std::size_t>(n), 0.0), next(static_cast<std::size_t>(n), 0.0);
    for (int w : g.adj[0]) mass[w] += 1.0 / root_deg;
    double returned = 0.0;
    for (std::int64_t t = 2; t <= *cap; ++t) {
      std::fill(next.begin(), next.end(), 0.0);
      for (int u = 1; u < n; ++u) {
        if (mass[u] == 0.0) continue;
        const double share = mass[u] / g.total_degree(u);
        for (int w : g.adj[u]) next[w] += share;
      }
      returned += next[0];
      next[0] = 0.0;
      mass.swap(next);
    }
    return returned;
  }
  // h(u) = P_u(hit root before exit); (D - A) h = b on non-root vertices.
  const int m = n - 1;
  if (m == 0) return 0.0;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int u = 1; u < n; ++u) {
    trip.emplace_back(u - 1, u - 1, static_cast<double>(g.total_degree(u)));
    for (int w : g.adj[u]) {
      if (w == 0) {
        b[u - 1] += 1.0;
      } else {
        trip.emplace_back(u - 1, w - 1, -1.0);
      }
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw std::runtime_error("return_probability_exact: singular system");
  const Eigen::VectorXd h = solver.solve(b);
  double p = 0.0;
  for (int w : g.adj[0]) p += h[w - 1];
  return p / root_deg;
}

McEstimate return_probability_mc(const BallGraph& g, std::optional<std::int64_t> cap, std::int64_t trials,
                                 Stream& stream) {
  McEstimate est;
  est.trials = trials;
  if (g.local_degree(0) == 0) {
    est.successes = trials;
  } else {
    const std::int64_t limit = cap ? *cap : std::numeric_limits<std::int64_t>::max();
    for (std::int64_t t = 0; t < trials; ++t) {
      int u = 0;
      for (std::int64_t step = 1; step <= limit; ++step) {
        const int deg = g.total_degree(u);
        const auto k = static_cast<int>(stream.below(static_cast<std::uint64_t>(deg)));
        if (k >= g.local_degree(u)) break;
        u = g.adj[u][k];
        if (u == 0) {
          ++est.successes;
          break;
        }
      }
    }
  }
  est.p = trials > 0 ? static_cast<double>(est.successes) / static_cast<double>(trials) : 0.0;
  est.ci = wilson_interval(est.successes, trials);
  return est;
}

}  // namespace lrp
