#pragma once

#include <cstdint>
#include <vector>

#include "lrp/model.hpp"
#include "lrp/rng.hpp"

namespace lrp {

// Offsets with sup-norm in (rho, r_max], enumerated shell by shell.
class ShellRange {
 public:
  ShellRange(int d, Coord rho, Coord r_max);
  __int128 size() const { return total_; }
  // Position -> offset, and the sup-norm radius of a position.
  Coord radius(__int128 pos) const;
  Point offset(__int128 pos) const;

 private:
  __int128 box(Coord R) const;  // number of points with sup-norm <= R
  int d_;
  Coord rho_, r_max_;
  __int128 base_, total_;
};

// Independent Bernoulli(p(z)) field over rho < |z|_inf <= r_max, drawn by
// geometric skips under the running envelope p(shell) and thinned to p(z).
template <class F>
void sample_bernoulli_field(const ModelParams& params, Coord rho, Coord r_max, Stream& stream, F&& on_open) {
  if (rho < 1) throw std::domain_error("sample_bernoulli_field: rho must be >= 1");
  if (r_max <= rho) return;
  const ShellRange range(params.d, rho, r_max);
  __int128 pos = 0;
  while (pos < range.size()) {
    const Coord R = range.radius(pos);
    const double q = connection_probability(static_cast<double>(R), params);
    const std::uint64_t skip = stream.geometric_skip(q);
    if (static_cast<__int128>(skip) > range.size() - pos) return;
    const __int128 cand = pos + static_cast<__int128>(skip) - 1;
    const Point z = range.offset(cand);
    const double p = edge_probability(z, params);
    if (p >= q || stream.uniform() * q < p) on_open(z);
    pos = cand + 1;
  }
}

// Exact sampler for P(Y = y) proportional to p(|y|) over 1 <= |y|_inf <= r_max.
class LatticeJumpLaw {
 public:
  LatticeJumpLaw(const ModelParams& params, Coord r_max, Coord table_radius = 0);

  Point sample(Stream& stream) const;
  // Exact probability; only available when the whole window is tabulated.
  double probability(const Point& y) const;
  Coord table_radius() const { return r0_; }
  Coord r_max() const { return r_max_; }
  double table_mass() const { return table_mass_; }
  double tail_envelope_mass() const { return tail_mass_; }

 private:
  Point sample_in_shell(Coord R, Stream& stream) const;

  ModelParams params_;
  Coord r_max_, r0_;
  std::vector<double> shell_weight_;  // index R, R = 1..r0
  std::vector<double> alias_prob_;
  std::vector<std::uint32_t> alias_;
  double table_mass_ = 0.0;
  double tail_mass_ = 0.0;
  double envelope_m_ = 0.0;
  double a_ = 0.0;  // envelope density x^{-a}
};

}  // namespace lrp
