#pragma once

#include <cstdint>
#include <vector>

#include "lrp/environment.hpp"

namespace lrp {

struct ClusterLabeling {
  std::vector<VertexId> label;        // union-find root per vertex
  std::vector<std::int64_t> sizes;    // descending
  VertexId largest = -1;              // root label of the largest cluster
  std::vector<std::uint8_t> in_largest;

  std::int64_t n1() const { return sizes.empty() ? 0 : sizes[0]; }
  std::int64_t n2() const { return sizes.size() < 2 ? 0 : sizes[1]; }
};

ClusterLabeling analyze_clusters(const Environment& env);

struct CutpointSet {
  std::vector<Coord> points;
  std::vector<Coord> gaps() const;
};

// d = 1 only. x is a cutpoint iff no non-unit edge {a,b} has a <= x <= b.
// On a torus, edges are read in the window [0, L) and wrapping edges cover both ends.
CutpointSet detect_cutpoints(const Environment& env);

}  // namespace lrp
