#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "lrp/excursion.hpp"
#include "lrp/exploration.hpp"
#include "lrp/types.hpp"

namespace lrp {

// Empirical law of (r, d) local types; draws are uniform over the sample.
class TypeSample {
 public:
  TypeSample() = default;
  explicit TypeSample(std::vector<VertexType> sample);
  VertexType draw(Stream& stream) const;
  const std::vector<VertexType>& sample() const { return sample_; }
  bool empty() const { return sample_.empty(); }

 private:
  std::vector<VertexType> sample_;
};

// Count of a geometric stream at the excursion parameter of (p, d); an
// infinite count (parameter 0) is reported as kInfiniteCount.
std::int64_t excursion_count(GeomStream& stream, double p, int d);

struct SideIndicators {
  int sigma = 0;
  int sigma_plus = 0;   // p-tilde replaced by q_j
  int sigma_minus = 0;  // p-tilde replaced by q_{j-1}
};

// R is evaluated at the type of v and at the cell edges; R-tilde at `tilde`.
// The overflow cell has no edges and gets sigma for all three.
SideIndicators side_indicators(const TypeGrid& grid, int cell, const VertexType& v, GeomStream& R,
                               GeomStream& R_tilde, const VertexType& tilde);

struct IncrementVariables {
  int cell = 0;
  std::int64_t iota = 0;
  SideIndicators side;
  VertexType tilde;
  std::vector<Point> offsets;  // w-field opens beyond rho
  Point sum;                   // sum of the offsets
  Point Z, Z_plus, Z_minus;
  Coord z_max = 0;             // largest sup-norm offset contributing to Z
};

struct IncrementKey {
  std::uint64_t seed = 0;
  std::uint64_t ell = 0;
  int cell = 0;
  std::int64_t iota = 0;
};

// The w field of (ell, j, m, iota) over offsets in (rho, reach], with R and
// R-tilde from their own keyed streams. `tilde` overrides the TypeSample draw.
IncrementVariables increment_variables(const ModelParams& params, const Scales& scales, const TypeGrid& grid,
                                       const IncrementKey& key, const VertexType& v, const TypeSample& types, Coord reach,
                                       const VertexType* tilde = nullptr);

struct DerivedPaths {
  double scale = 1.0;            // 2^{-k/alpha}
  std::vector<Point> x_hat;      // unscaled, index i = 0..n
  std::vector<Point> x_frak;     // unscaled
  std::vector<Point> x;          // the walk, unscaled
  std::vector<std::uint8_t> main_phase;  // 1 if step i is outside special phases
  std::vector<IncrementVariables> hat_increments;
  std::int64_t flagged_steps = 0;
};

// rates[c] is C for type cell c (cell 0 ignored). Throws std::invalid_argument
// when the table does not match the grid, and on flagged transcripts unless
// `tolerate_flags` is set.
DerivedPaths build_derived_processes(const ExplorationState& state, std::size_t walk, const std::vector<double>& rates,
                                     const TypeSample& types, bool tolerate_flags = false);

// max over main-phase i of the sup-norm |X-hat_i - X_i|, unscaled.
double coupling_gap(const DerivedPaths& paths);

struct KReport {
  int J = 0;
  std::vector<double> q;
  std::vector<std::vector<double>> sigma;  // [j-1][m-1]
  std::vector<std::vector<double>> rates;  // [j-1][m-1]
  double K = 0.0;
  double psi = 0.0;
  std::int64_t trials = 0;
};

// sigma_{j,m} by Monte Carlo. Trial t at degree m uses streams keyed by (m, t)
// only, so tables for different grids share their random numbers.
KReport estimate_K(const TypeGrid& grid, const std::vector<double>& rates, const TypeSample& types,
                   std::int64_t trials, std::uint64_t seed, double max_atom_mass = 0.01);

nlohmann::json to_json(const KReport& report);

}  // namespace lrp
