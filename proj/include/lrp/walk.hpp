#pragma once

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lrp/environment.hpp"
#include "lrp/rng.hpp"

namespace lrp {

struct WalkPath {
  int d = 1;
  std::vector<Point> positions;      // unwrapped X_0..X_n
  std::vector<Point> sites;          // reduced vertex identity per step
  std::vector<std::uint8_t> is_new;  // N_i
  std::vector<Coord> jump;           // sup-norm of X_i - X_{i-1}; jump[0] = 0
  std::uint64_t walk_index = 0;
  std::uint64_t stream_key = 0;

  std::int64_t steps() const { return static_cast<std::int64_t>(positions.size()) - 1; }
  const Point& start() const { return positions.front(); }
};

// A graph the walk can move on: degree, k-th neighbour with its displacement, reduced site.
template <class V>
concept WalkView = requires(const V& view, const typename V::vertex_type& x, std::int64_t k) {
  { view.degree(x) } -> std::convertible_to<std::int64_t>;
  { view.step(x, k) } -> std::same_as<std::pair<typename V::vertex_type, Point>>;
  { view.site(x) } -> std::same_as<Point>;
  { view.dimension() } -> std::convertible_to<int>;
};

struct EnvironmentView {
  using vertex_type = VertexId;
  const Environment* env;

  std::int64_t degree(VertexId v) const { return env->degree(v); }
  std::pair<VertexId, Point> step(VertexId v, std::int64_t k) const {
    const VertexId w = env->neighbor(v, k);
    return {w, env->displacement(v, w)};
  }
  Point site(VertexId v) const { return env->point(v); }
  int dimension() const { return env->dimension(); }
};

class IsolatedStartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <WalkView V>
WalkPath run_walk(const V& view, const typename V::vertex_type& start, std::int64_t n, Stream stream,
                  std::uint64_t walk_index = 0) {
  if (view.degree(start) < 1) throw IsolatedStartError("walk start has no neighbours");
  WalkPath path;
  path.d = view.dimension();
  path.walk_index = walk_index;
  path.stream_key = stream.key();
  const std::size_t len = static_cast<std::size_t>(n) + 1;
  path.positions.reserve(len);
  path.sites.reserve(len);
  path.is_new.reserve(len);
  path.jump.reserve(len);
  std::unordered_set<Point, PointHash> visited;
  typename V::vertex_type cur = start;
  Point pos = view.site(start);
  path.positions.push_back(pos);
  path.sites.push_back(pos);
  path.is_new.push_back(1);
  path.jump.push_back(0);
  visited.insert(pos);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t deg = view.degree(cur);
    auto [next, disp] = view.step(cur, static_cast<std::int64_t>(stream.below(static_cast<std::uint64_t>(deg))));
    cur = next;
    pos += disp;
    Coord j = 0;
    for (int c = 0; c < kMaxDim; ++c) {
      const Coord a = disp[c] < 0 ? -disp[c] : disp[c];
      if (a > j) j = a;
    }
    const Point site = view.site(cur);
    path.positions.push_back(pos);
    path.sites.push_back(site);
    path.is_new.push_back(visited.insert(site).second ? 1 : 0);
    path.jump.push_back(j);
  }
  return path;
}

WalkPath run_walk(const Environment& env, VertexId start, std::int64_t n, Stream stream, std::uint64_t walk_index = 0);

// Walk l uses Stream(master, Role::walk, {l}).
std::vector<WalkPath> run_ensemble(const Environment& env, VertexId start, std::int64_t n, std::uint64_t count,
                                   std::uint64_t master);

enum class Interpolation { step, linear };

struct StepFunction {
  std::int64_t n = 1;
  double exponent = 1.0;
  Interpolation mode = Interpolation::step;
  Eigen::MatrixXd values;  // d x (n+1)

  int dimension() const { return static_cast<int>(values.rows()); }
  Eigen::VectorXd operator()(double t) const;
};

StepFunction rescale_path(const WalkPath& path, double a, Interpolation mode = Interpolation::step);

// Exact on the merged breakpoint grid for step functions; linear pieces use
// 16-point Gauss-Legendre on each merged cell.
double lq_distance(const StepFunction& f, const StepFunction& g, double q, Norm pointwise = Norm::sup);

// "# {json}" metadata line, then "i,x1..xd,new,jump".
void write_path_csv(const WalkPath& path, const std::string& metadata_json, std::ostream& out);

}  // namespace lrp
