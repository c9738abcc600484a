#include "lrp/lattice_law.hpp"

#include <cmath>
#include <stdexcept>

namespace lrp {

namespace {

__int128 ipow128(__int128 b, int e) {
  __int128 r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

ShellRange::ShellRange(int d, Coord rho, Coord r_max) : d_(d), rho_(rho), r_max_(r_max) {
  const double bits = d * std::log2(2.0 * static_cast<double>(r_max) + 1.0);
  if (bits > 120) throw std::domain_error("ShellRange: window too large for this dimension");
  base_ = box(rho);
  total_ = r_max > rho ? box(r_max) - base_ : 0;
}

__int128 ShellRange::box(Coord R) const { return ipow128(2 * static_cast<__int128>(R) + 1, d_); }

Coord ShellRange::radius(__int128 pos) const {
  const __int128 target = pos + base_;  // need box(R) > target
  const double est = (std::pow(static_cast<double>(target) + 1.0, 1.0 / d_) - 1.0) / 2.0;
  auto R = static_cast<Coord>(std::floor(est));
  if (R < rho_ + 1) R = rho_ + 1;
  while (R > rho_ + 1 && box(R - 1) > target) --R;
  while (box(R) <= target) ++R;
  return R;
}

Point ShellRange::offset(__int128 pos) const {
  const Coord R = radius(pos);
  const __int128 idx = pos + base_ - box(R - 1);
  return shell_point(d_, R, static_cast<std::uint64_t>(idx));
}

LatticeJumpLaw::LatticeJumpLaw(const ModelParams& params, Coord r_max, Coord table_radius)
    : params_(params), r_max_(r_max) {
  if (!(params.s > params.d)) throw std::invalid_argument("LatticeJumpLaw: non-summable law (s <= d)");
  if (r_max < 1) throw std::invalid_argument("LatticeJumpLaw: r_max must be >= 1");
  if (table_radius <= 0) table_radius = params.d == 1 ? (Coord{1} << 16) : params.d == 2 ? 256 : 32;
  r0_ = std::min(table_radius, r_max);
  const int d = params.d;

  shell_weight_.assign(static_cast<std::size_t>(r0_) + 1, 0.0);
  for (Coord R = 1; R <= r0_; ++R) {
    double w = 0.0;
    if (d == 1) {
      w = 2.0 * edge_probability(make_point(R), params);
    } else {
      const std::uint64_t n = shell_size(d, static_cast<std::uint64_t>(R));
      for (std::uint64_t i = 0; i < n; ++i) w += edge_probability(shell_point(d, R, i), params);
    }
    shell_weight_[R] = w;
    table_mass_ += w;
  }

  // Vose alias table over R = 1..r0.
  const auto n = static_cast<std::size_t>(r0_);
  alias_prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = shell_weight_[i + 1] * static_cast<double>(n) / table_mass_;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    alias_prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) alias_prob_[i] = 1.0;
  for (auto i : small) alias_prob_[i] = 1.0;

  if (r_max_ > r0_) {
    a_ = params.s + 1.0 - d;
    envelope_m_ = 2.0 * d * params.beta * std::pow(2.0, d - 1) * std::pow(1.0 + 1.0 / static_cast<double>(r0_), params.s);
    const double lo = static_cast<double>(r0_) + 1.0, hi = static_cast<double>(r_max_) + 1.0;
    tail_mass_ = envelope_m_ * (std::pow(lo, 1.0 - a_) - std::pow(hi, 1.0 - a_)) / (a_ - 1.0);
  }
}

Point LatticeJumpLaw::sample_in_shell(Coord R, Stream& stream) const {
  const int d = params_.d;
  if (d == 1) return make_point((stream() & 1) ? R : -R);
  const std::uint64_t n = shell_size(d, static_cast<std::uint64_t>(R));
  Point axis;
  axis[0] = R;
  const double pmax = edge_probability(axis, params_);
  while (true) {
    const Point y = shell_point(d, R, stream.below(n));
    if (params_.norm == Norm::sup) return y;
    if (stream.uniform() * pmax < edge_probability(y, params_)) return y;
  }
}

Point LatticeJumpLaw::sample(Stream& stream) const {
  const int d = params_.d;
  while (true) {
    const double u = stream.uniform() * (table_mass_ + tail_mass_);
    if (u < table_mass_) {
      const std::uint64_t i = stream.below(alias_prob_.size());
      const std::uint64_t k = stream.uniform() < alias_prob_[i] ? i : alias_[i];
      return sample_in_shell(static_cast<Coord>(k) + 1, stream);
    }
    const double lo = static_cast<double>(r0_) + 1.0, hi = static_cast<double>(r_max_) + 1.0;
    const double e = 1.0 - a_;
    const double lo_e = std::pow(lo, e), hi_e = std::pow(hi, e);
    const double x = std::pow(lo_e - stream.uniform() * (lo_e - hi_e), 1.0 / e);
    auto R = static_cast<Coord>(std::floor(x));
    if (R > r_max_) R = r_max_;
    if (R <= r0_) R = r0_ + 1;
    const double Rd = static_cast<double>(R);
    // Envelope mass on [R, R+1), computed without cancellation.
    const double cell = std::pow(Rd, e) * std::expm1(e * std::log1p(1.0 / Rd)) / e;
    Point y;
    double count = 0.0;
    if (d == 1) {
      y = make_point((stream() & 1) ? R : -R);
      count = 2.0;
    } else {
      const std::uint64_t n = shell_size(d, static_cast<std::uint64_t>(R));
      y = shell_point(d, R, stream.below(n));
      count = static_cast<double>(n);
    }
    const double accept = count * edge_probability(y, params_) / (envelope_m_ * cell);
    if (stream.uniform() < accept) return y;
  }
}

double LatticeJumpLaw::probability(const Point& y) const {
  if (r_max_ > r0_) throw std::logic_error("LatticeJumpLaw::probability: window not fully tabulated");
  const Coord R = sup_norm(y, params_.d);
  if (R < 1 || R > r_max_) return 0.0;
  return edge_probability(y, params_) / table_mass_;
}

}  // namespace lrp
