#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lrp {

// Local type of a vertex: return probability inside its ball and degree inside it.
struct VertexType {
  double p = 1.0;
  int m = 0;
};

// Bins (j, m) with 1 <= j, m <= J from a grid 0 = q_0 < q_1 < ... < q_J < 1.
// Cell 0 is the overflow type (0, 0).
class TypeGrid {
 public:
  TypeGrid() = default;
  // q holds q_1..q_J.
  explicit TypeGrid(std::vector<double> q);

  int J() const { return static_cast<int>(q_.size()); }
  double q(int j) const { return j == 0 ? 0.0 : q_[static_cast<std::size_t>(j) - 1]; }
  const std::vector<double>& upper() const { return q_; }
  int cells() const { return J() * J() + 1; }

  std::pair<int, int> classify(double p, int m) const;
  int cell(int j, int m) const { return j == 0 ? 0 : (j - 1) * J() + m; }
  std::pair<int, int> type_of_cell(int c) const {
    if (c == 0) return {0, 0};
    return {(c - 1) / J() + 1, (c - 1) % J() + 1};
  }
  int cell_of(const VertexType& t) const {
    auto [j, m] = classify(t.p, t.m);
    return cell(j, m);
  }

  // max_j 1/(1 - q_j) - 1/(1 - q_{j-1}).
  double psi() const;
  // Largest empirical mass sitting exactly on a grid point.
  double atom_mass(std::span<const double> p) const;

 private:
  std::vector<double> q_;
};

// Equally spaced quantiles of the sample at levels j/(J+1), moved off atoms by
// `jitter` and forced strictly increasing below 1.
TypeGrid quantile_grid(std::vector<double> p, int J, double jitter = 1e-6);

class AtomCollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lrp
