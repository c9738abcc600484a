#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lrp/model.hpp"

namespace lrp {

class BudgetError : public std::runtime_error {
 public:
  BudgetError(std::uint64_t required, std::uint64_t budget);
  std::uint64_t required() const { return required_; }
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

struct GenerateOptions {
  std::uint64_t memory_budget_bytes = 3ULL << 30;
};

using Edge = std::pair<VertexId, VertexId>;

// Immutable LRP graph on a finite box or torus. Forced nearest-neighbour
// edges are implicit; every random edge is stored in a sorted CSR table.
class Environment {
 public:
  Environment() = default;
  // Edges are unordered pairs; duplicates and self-loops are rejected.
  Environment(ModelParams params, std::uint64_t seed, std::vector<Edge> edges);

  const ModelParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const Torus& torus() const { return torus_; }
  int dimension() const { return params_.d; }
  VertexId vertex_count() const { return static_cast<VertexId>(offsets_.size()) - 1; }

  std::span<const VertexId> stored_neighbors(VertexId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  // Stored edges of non-unit displacement.
  std::vector<VertexId> long_neighbors(VertexId v) const;

  int forced_count(VertexId v) const;
  Point forced_direction(VertexId v, int k) const;
  std::int64_t degree(VertexId v) const {
    return forced_count(v) + static_cast<std::int64_t>(offsets_[v + 1] - offsets_[v]);
  }
  // k-th neighbour: forced directions first, then stored edges in sorted order.
  VertexId neighbor(VertexId v, std::int64_t k) const;
  // Unwrapped displacement along the edge (v, w).
  Point displacement(VertexId v, VertexId w) const;
  bool has_edge(VertexId v, VertexId w) const;

  Point point(VertexId v) const { return torus_.point(v); }
  VertexId id(const Point& p) const { return torus_.index(p); }
  bool inside(const Point& p) const;

  std::uint64_t stored_edge_count() const { return targets_.size() / 2; }
  std::uint64_t edge_count() const;
  std::vector<Edge> stored_edges() const;  // u < w, lexicographic

  friend bool operator==(const Environment& a, const Environment& b) {
    return a.seed_ == b.seed_ && a.offsets_ == b.offsets_ && a.targets_ == b.targets_ &&
           a.params_.d == b.params_.d && a.params_.s == b.params_.s && a.params_.beta == b.params_.beta &&
           a.params_.nn_prob_one == b.params_.nn_prob_one && a.params_.L == b.params_.L &&
           a.params_.boundary == b.params_.boundary && a.params_.norm == b.params_.norm;
  }

 private:
  ModelParams params_;
  Torus torus_;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<VertexId> targets_;
};

// Bulk generator: geometric skips within each displacement class.
Environment generate_environment(const ModelParams& params, std::uint64_t seed,
                                 const GenerateOptions& options = {});

// Reference generator: one keyed-hash uniform per pair, O(V^2). Small boxes only.
Environment generate_environment_keyed(const ModelParams& params, std::uint64_t seed);

std::uint64_t estimated_generation_bytes(const ModelParams& params);

}  // namespace lrp
