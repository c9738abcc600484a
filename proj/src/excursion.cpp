#include "lrp/excursion.hpp"

#include <algorithm>
#include <cmath>

#include "lrp/stats.hpp"

namespace lrp {

double excursion_parameter(double p_tilde, int d_tilde) {
  if (!(p_tilde >= 0.0 && p_tilde <= 1.0)) throw std::domain_error("excursion_parameter: p must lie in [0, 1]");
  if (d_tilde < 0) throw std::domain_error("excursion_parameter: negative degree");
  if (p_tilde >= 1.0 || d_tilde == 0) {
    throw DegenerateParameterError("excursion_parameter: no local neighbours or certain return; no escape possible");
  }
  const double e = (1.0 - p_tilde) * d_tilde;
  return e / (1.0 + e);
}

double excursion_parameter_or_zero(double p_tilde, int d_tilde) {
  if (p_tilde >= 1.0 || d_tilde == 0) return 0.0;
  return excursion_parameter(p_tilde, d_tilde);
}

double GeomStream::u(std::size_t i) {
  while (cache_.size() <= i) cache_.push_back(stream_.uniform());
  return cache_[i];
}

std::int64_t GeomStream::value(double t, std::int64_t limit) {
  if (!(t > 0.0) || t > 1.0) throw std::domain_error("GeomStream: t must lie in (0, 1]");
  for (std::int64_t i = 0; i < limit; ++i) {
    if (u(static_cast<std::size_t>(i)) < t) return i;
  }
  return limit;
}

double geometric_exceeds(double a, double b) {
  if (!(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0)) throw std::domain_error("geometric_exceeds: parameters in (0, 1]");
  return b * (1.0 - a) / (1.0 - (1.0 - a) * (1.0 - b));
}

VStar join_balls(BallGraph a, BallGraph b) {
  VStar g;
  g.na = a.size();
  g.a = std::move(a);
  g.b = std::move(b);
  return g;
}

std::vector<int> VStar::neighbours(int u) const {
  std::vector<int> out;
  if (u < na) {
    out = a.adj[static_cast<std::size_t>(u)];
    if (u == 0) out.push_back(na);
  } else {
    for (int w : b.adj[static_cast<std::size_t>(u - na)]) out.push_back(w + na);
    if (u == na) out.push_back(0);
  }
  return out;
}

namespace {

// Neighbour choice inside the root's own ball: k < local degree picks a ball
// vertex, otherwise an exit stub.
struct SideView {
  const BallGraph* ball;
  int base;
};

SideView side_of(const VStar& g, int root) { return root == g.v() ? SideView{&g.a, 0} : SideView{&g.b, g.na}; }

}  // namespace

ExcursionPath sample_excursion(const VStar& g, int root, Excursion type, std::optional<std::int64_t> cap,
                               Stream& stream, std::int64_t max_attempts) {
  ExcursionPath path;
  path.type = type;
  if (type == Excursion::cross) {
    path.vertices.push_back(root == g.v() ? g.x() : g.v());
    return path;
  }
  const SideView side = side_of(g, root);
  const BallGraph& ball = *side.ball;
  if (ball.total_degree(0) == 0) throw DegenerateParameterError("sample_excursion: root has no ball neighbours");
  const std::int64_t limit = cap ? *cap : std::numeric_limits<std::int64_t>::max();
  for (std::int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    path.vertices.clear();
    path.absorbed = false;
    int u = 0;
    bool returned = false;
    for (std::int64_t t = 1; t <= limit; ++t) {
      const int deg = ball.total_degree(u);
      const auto k = static_cast<int>(stream.below(static_cast<std::uint64_t>(deg)));
      if (k >= ball.local_degree(u)) {
        path.absorbed = true;
        break;
      }
      u = ball.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(k)];
      path.vertices.push_back(u + side.base);
      if (u == 0) {
        returned = true;
        break;
      }
    }
    if (returned == (type == Excursion::back)) return path;
  }
  throw std::runtime_error("sample_excursion: rejection budget exhausted");
}

SideTypes side_types(const VStar& g, std::optional<std::int64_t> cap) {
  SideTypes t;
  t.d_v = g.a.total_degree(0);
  t.d_x = g.b.total_degree(0);
  t.p_v = return_probability_exact(g.a, cap);
  t.p_x = return_probability_exact(g.b, cap);
  return t;
}

CoupledVStarWalk coupled_vstar_walk(const VStar& g, std::int64_t R_v, std::int64_t R_x, std::int64_t cap,
                                    std::int64_t length, Stream& stream) {
  const SideTypes types = side_types(g, cap);
  auto back_prob = [](double p, int d) { return d == 0 ? 0.0 : p * d / (1.0 + d); };
  const double back_v = back_prob(types.p_v, types.d_v);
  const double back_x = back_prob(types.p_x, types.d_x);

  CoupledVStarWalk walk;
  walk.y.push_back(g.v());
  std::int64_t crossed_v = 0, crossed_x = 0;
  int root = g.v();
  auto done = [&] { return static_cast<std::int64_t>(walk.y.size()) > length; };
  while (!done() && walk.tau_star < 0) {
    const bool at_v = root == g.v();
    const double pb = at_v ? back_v : back_x;
    while (!done() && stream.uniform() < pb) {
      const ExcursionPath e = sample_excursion(g, root, Excursion::back, cap, stream);
      walk.y.insert(walk.y.end(), e.vertices.begin(), e.vertices.end());
    }
    if (done()) break;
    std::int64_t& crossed = at_v ? crossed_v : crossed_x;
    const std::int64_t R = at_v ? R_v : R_x;
    if (crossed < R) {
      ++crossed;
      ++walk.crossings;
      root = at_v ? g.x() : g.v();
      walk.y.push_back(root);
      continue;
    }
    const ExcursionPath e = sample_excursion(g, root, Excursion::escape, cap, stream);
    walk.y.insert(walk.y.end(), e.vertices.begin(), e.vertices.end());
    walk.tau_star = static_cast<std::int64_t>(walk.y.size()) - 1;
    walk.x_side_at_tau_star = !at_v;
    walk.absorbed = e.absorbed;
  }
  // Free V* walk after the first escape.
  while (!done() && !walk.absorbed) {
    const int u = walk.y.back();
    const std::vector<int> nb = g.neighbours(u);
    const auto deg = static_cast<std::uint64_t>(nb.size()) + static_cast<std::uint64_t>(g.exits(u));
    const auto k = stream.below(deg);
    if (k >= nb.size()) {
      walk.absorbed = true;
      break;
    }
    walk.y.push_back(nb[k]);
  }
  if (static_cast<std::int64_t>(walk.y.size()) > length + 1) walk.y.resize(static_cast<std::size_t>(length + 1));
  return walk;
}

namespace {

// R for one root read directly from its excursion sequence (crossings restart at the root).
std::int64_t direct_count(const VStar& g, int root, std::optional<std::int64_t> cap, Stream& stream) {
  const BallGraph& ball = root == g.v() ? g.a : g.b;
  const int options = ball.total_degree(0) + 1;
  const std::int64_t limit = cap ? *cap : std::numeric_limits<std::int64_t>::max();
  std::int64_t crossings = 0;
  for (;;) {
    const auto k = static_cast<int>(stream.below(static_cast<std::uint64_t>(options)));
    if (k == options - 1) {
      ++crossings;
      continue;
    }
    if (k >= ball.local_degree(0)) return crossings;  // exit stub: escape
    int u = ball.adj[0][static_cast<std::size_t>(k)];
    bool returned = u == 0;
    for (std::int64_t t = 2; t <= limit && !returned; ++t) {
      const int deg = ball.total_degree(u);
      const auto j = static_cast<int>(stream.below(static_cast<std::uint64_t>(deg)));
      if (j >= ball.local_degree(u)) break;
      u = ball.adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)];
      returned = u == 0;
    }
    if (!returned) return crossings;
  }
}

}  // namespace

VStarReport simulate_vstar(const BallGraph& a, const BallGraph& b, std::optional<std::int64_t> cap,
                           std::int64_t trials, Stream& stream) {
  if (a.size() < 1 || b.size() < 1) throw std::invalid_argument("simulate_vstar: empty ball");
  const VStar g = join_balls(a, b);
  for (const BallGraph* ball : {&g.a, &g.b}) {
    // Every vertex must be reachable from the root.
    std::vector<char> seen(static_cast<std::size_t>(ball->size()), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : ball->adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw std::invalid_argument("simulate_vstar: ball is not connected");
    }
  }
  VStarReport rep;
  rep.types = side_types(g, cap);
  rep.param_v = excursion_parameter(rep.types.p_v, rep.types.d_v);
  rep.param_x = excursion_parameter(rep.types.p_x, rep.types.d_x);
  rep.trials = trials;
  const std::int64_t limit = cap ? *cap : std::numeric_limits<std::int64_t>::max();
  constexpr std::int64_t kStepBudget = 10000000;

  for (std::int64_t t = 0; t < trials; ++t) {
    rep.r_v.push_back(direct_count(g, g.v(), cap, stream));
    rep.r_x.push_back(direct_count(g, g.x(), cap, stream));

    // Plain V* walk from v; excursion bookkeeping at both roots.
    std::int64_t crosses[2] = {0, 0};
    std::int64_t first_escape[2] = {-1, -1};  // crossings count at first escape
    int side_at_tau = -1;
    std::int64_t crossings_at_tau = 0, total_crossings = 0;
    int u = g.v();
    int current_root = -1;  // root whose excursion is in progress
    std::int64_t away = 0;
    bool absorbed = false;
    for (std::int64_t step = 0; step < kStepBudget; ++step) {
      if (first_escape[0] >= 0 && first_escape[1] >= 0) break;
      const bool at_root = u == g.v() || u == g.x();
      if (at_root) {
        current_root = u == g.v() ? 0 : 1;
        away = 0;
      }
      const std::vector<int> nb = g.neighbours(u);
      const auto deg = static_cast<std::uint64_t>(nb.size()) + static_cast<std::uint64_t>(g.exits(u));
      const auto k = stream.below(deg);
      const int r = current_root;
      auto escape = [&] {
        if (first_escape[r] < 0) first_escape[r] = crosses[r];
        if (side_at_tau < 0) {
          side_at_tau = r;
          crossings_at_tau = total_crossings;
        }
        current_root = -1;
      };
      if (k >= nb.size()) {
        if (r >= 0) escape();
        absorbed = true;
        break;
      }
      const int w = nb[k];
      if (at_root && (w == g.v() || w == g.x())) {
        if (first_escape[r] < 0) ++crosses[r];
        ++total_crossings;
        u = w;
        continue;
      }
      u = w;
      if (r >= 0 && u != (r == 0 ? g.v() : g.x())) {
        ++away;
        if (away >= limit) escape();
      }
    }
    const bool both = first_escape[0] >= 0 && first_escape[1] >= 0;
    if (!both || side_at_tau < 0) continue;
    ++rep.well_defined;
    const bool x_side = side_at_tau == 1;
    rep.side_agree += x_side == (first_escape[0] > first_escape[1]);
    rep.parity_agree += x_side == (crossings_at_tau % 2 == 1);
    (void)absorbed;
  }
  rep.ks_v = ks_statistic_discrete(rep.r_v, [&](std::int64_t r) { return 1.0 - std::pow(1.0 - rep.param_v, r + 1.0); });
  rep.ks_x = ks_statistic_discrete(rep.r_x, [&](std::int64_t r) { return 1.0 - std::pow(1.0 - rep.param_x, r + 1.0); });
  return rep;
}

}  // namespace lrp
