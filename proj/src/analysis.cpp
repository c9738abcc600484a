#include "lrp/analysis.hpp"

#include <algorithm>
#include <numeric>

namespace lrp {

namespace {

struct UnionFind {
  std::vector<VertexId> parent;
  std::vector<std::int64_t> size;
  explicit UnionFind(VertexId n) : parent(static_cast<std::size_t>(n)), size(static_cast<std::size_t>(n), 1) {
    std::iota(parent.begin(), parent.end(), VertexId{0});
  }
  VertexId find(VertexId v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  void unite(VertexId a, VertexId b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b] || (size[a] == size[b] && b < a)) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

}  // namespace

ClusterLabeling analyze_clusters(const Environment& env) {
  const VertexId n = env.vertex_count();
  UnionFind uf(n);
  for (VertexId v = 0; v < n; ++v) {
    const int f = env.forced_count(v);
    for (int k = 0; k < f; ++k) uf.unite(v, env.neighbor(v, k));
    for (VertexId w : env.stored_neighbors(v)) {
      if (v < w) uf.unite(v, w);
    }
  }
  ClusterLabeling out;
  out.label.resize(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) {
    out.label[v] = uf.find(v);
    if (out.label[v] == v) {
      out.sizes.push_back(uf.size[v]);
      if (out.largest < 0 || uf.size[v] > uf.size[out.largest]) out.largest = v;
    }
  }
  std::sort(out.sizes.rbegin(), out.sizes.rend());
  out.in_largest.resize(static_cast<std::size_t>(n));
  for (VertexId v = 0; v < n; ++v) out.in_largest[v] = out.label[v] == out.largest;
  return out;
}

std::vector<Coord> CutpointSet::gaps() const {
  std::vector<Coord> g;
  for (std::size_t i = 1; i < points.size(); ++i) g.push_back(points[i] - points[i - 1]);
  return g;
}

CutpointSet detect_cutpoints(const Environment& env) {
  if (env.dimension() != 1) throw UnsupportedError("detect_cutpoints: only d = 1 is supported");
  if (!env.params().nn_prob_one) throw UnsupportedError("detect_cutpoints: needs forced nearest-neighbour edges");
  const Coord L = env.params().L;
  const bool torus = env.params().boundary == Boundary::torus;
  // reach[x]: largest right end among non-unit edges with left end x.
  std::vector<Coord> reach(static_cast<std::size_t>(L), -1);
  Coord initial = -1;
  for (VertexId a = 0; a < L; ++a) {
    for (VertexId b : env.stored_neighbors(a)) {
      if (b <= a) continue;
      const Coord len = b - a;
      if (torus && 2 * len > L) {
        if (L - len < 2) continue;
        // Wrapping edge: spans [b, L) and [0, a].
        reach[b] = std::max<Coord>(reach[b], a + L);
        initial = std::max<Coord>(initial, a);
      } else if (len >= 2) {
        reach[a] = std::max<Coord>(reach[a], b);
      }
    }
  }
  CutpointSet out;
  Coord right = initial;
  for (Coord x = 0; x < L; ++x) {
    right = std::max(right, reach[x]);
    if (right < x) out.points.push_back(x);
  }
  return out;
}

}  // namespace lrp
