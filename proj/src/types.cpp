#include "lrp/types.hpp"

#include <algorithm>

#include "lrp/stats.hpp"

namespace lrp {

TypeGrid::TypeGrid(std::vector<double> q) : q_(std::move(q)) {
  if (q_.empty()) throw std::invalid_argument("TypeGrid: empty q grid");
  double prev = 0.0;
  for (double x : q_) {
    if (!(x > prev) || !(x < 1.0)) throw std::invalid_argument("TypeGrid: need 0 < q_1 < ... < q_J < 1");
    prev = x;
  }
}

std::pair<int, int> TypeGrid::classify(double p, int m) const {
  if (m < 1 || m > J() || !(p < q_.back())) return {0, 0};
  const auto it = std::upper_bound(q_.begin(), q_.end(), p);
  return {static_cast<int>(it - q_.begin()) + 1, m};
}

double TypeGrid::psi() const {
  double best = 0.0, prev = 1.0;
  for (double x : q_) {
    const double cur = 1.0 / (1.0 - x);
    best = std::max(best, cur - prev);
    prev = cur;
  }
  return best;
}

double TypeGrid::atom_mass(std::span<const double> p) const {
  if (p.empty()) return 0.0;
  double worst = 0.0;
  for (double x : q_) {
    const auto hits = std::count(p.begin(), p.end(), x);
    worst = std::max(worst, static_cast<double>(hits) / static_cast<double>(p.size()));
  }
  return worst;
}

TypeGrid quantile_grid(std::vector<double> p, int J, double jitter) {
  if (J < 1) throw std::invalid_argument("quantile_grid: J must be >= 1");
  if (p.empty()) throw std::invalid_argument("quantile_grid: empty sample");
  std::sort(p.begin(), p.end());
  std::vector<double> q;
  double prev = 0.0;
  for (int j = 1; j <= J; ++j) {
    double x = quantile_sorted(p, static_cast<double>(j) / (J + 1));
    // Step off atoms: the grid point must not coincide with any sample value.
    while (std::binary_search(p.begin(), p.end(), x) || !(x > prev)) x = std::max(x, prev) + jitter;
    if (!(x < 1.0)) throw AtomCollisionError("quantile_grid: grid reaches 1; lower J or the jitter");
    q.push_back(x);
    prev = x;
  }
  return TypeGrid(std::move(q));
}

}  // namespace lrp
