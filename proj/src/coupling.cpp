#include "lrp/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lrp/lattice_law.hpp"

namespace lrp {

TypeSample::TypeSample(std::vector<VertexType> sample) : sample_(std::move(sample)) {}

VertexType TypeSample::draw(Stream& stream) const {
  if (sample_.empty()) throw std::invalid_argument("TypeSample: empty law");
  return sample_[stream.below(sample_.size())];
}

std::int64_t excursion_count(GeomStream& stream, double p, int d) {
  const double t = excursion_parameter_or_zero(p, d);
  if (t == 0.0) return kInfiniteCount;
  return stream.value(t);
}

SideIndicators side_indicators(const TypeGrid& grid, int cell, const VertexType& v, GeomStream& R,
                               GeomStream& R_tilde, const VertexType& tilde) {
  const std::int64_t rt = excursion_count(R_tilde, tilde.p, tilde.m);
  SideIndicators s;
  s.sigma = excursion_count(R, v.p, v.m) > rt;
  if (cell == 0) {
    s.sigma_plus = s.sigma_minus = s.sigma;
    return s;
  }
  const auto [j, m] = grid.type_of_cell(cell);
  s.sigma_plus = excursion_count(R, grid.q(j), m) > rt;
  s.sigma_minus = excursion_count(R, grid.q(j - 1), m) > rt;
  return s;
}

IncrementVariables increment_variables(const ModelParams& params, const Scales& scales, const TypeGrid& grid,
                                       const IncrementKey& key, const VertexType& v, const TypeSample& types,
                                       Coord reach, const VertexType* tilde) {
  const auto [j, m] = grid.type_of_cell(key.cell);
  const std::uint64_t uj = static_cast<std::uint64_t>(j), um = static_cast<std::uint64_t>(m);
  const auto ui = static_cast<std::uint64_t>(key.iota);
  IncrementVariables inc;
  inc.cell = key.cell;
  inc.iota = key.iota;
  if (tilde != nullptr) {
    inc.tilde = *tilde;
  } else {
    Stream ts(key.seed, Role::type_sample, {key.ell, uj, um, ui});
    inc.tilde = types.draw(ts);
  }
  GeomStream R(key.seed, Role::coupling_R, {key.ell, uj, um, ui});
  GeomStream Rt(key.seed, Role::coupling_Rtilde, {key.ell, uj, um, ui});
  inc.side = side_indicators(grid, key.cell, v, R, Rt, inc.tilde);

  if (reach > scales.rho) {
    Stream w(key.seed, Role::coupling_w, {key.ell, uj, um, ui});
    sample_bernoulli_field(params, scales.rho, reach, w, [&](const Point& z) {
      inc.offsets.push_back(z);
      inc.sum += z;
    });
  }
  auto times = [](int c, const Point& p) {
    Point out;
    for (int i = 0; i < kMaxDim; ++i) out[i] = c * p[i];
    return out;
  };
  inc.Z = times(inc.side.sigma, inc.sum);
  inc.Z_plus = times(inc.side.sigma_plus, inc.sum);
  inc.Z_minus = times(inc.side.sigma_minus, inc.sum);
  if (inc.side.sigma) {
    for (const Point& z : inc.offsets) inc.z_max = std::max(inc.z_max, sup_norm(z, params.d));
  }
  return inc;
}

DerivedPaths build_derived_processes(const ExplorationState& state, std::size_t walk, const std::vector<double>& rates,
                                     const TypeSample& types, bool tolerate_flags) {
  const TypeGrid& grid = state.grid();
  if (static_cast<int>(rates.size()) != grid.cells()) {
    throw std::invalid_argument("build_derived_processes: type-rate table does not match the grid");
  }
  const WalkTranscript& tr = state.transcripts.at(walk);
  const WalkPath& path = state.paths.at(walk);
  const ExplorationConfig& cfg = state.config();
  const Scales& sc = state.scales();
  const ModelParams& params = cfg.params;
  const Coord reach = cfg.backend == ExplorationBackend::lazy_zd ? cfg.r_max : (params.L - 1) / 2;

  DerivedPaths out;
  out.scale = std::exp2(-sc.k / sc.alpha);
  for (const StepRecord& s : tr.steps) out.flagged_steps += s.B != 0;
  if (out.flagged_steps > 0 && !tolerate_flags) {
    throw std::invalid_argument("build_derived_processes: transcript carries error flags");
  }
  const auto n = static_cast<std::int64_t>(tr.steps.size());
  out.x = path.positions;
  out.main_phase.resize(static_cast<std::size_t>(n) + 1);
  for (std::int64_t i = 0; i < n; ++i) out.main_phase[static_cast<std::size_t>(i)] = tr.steps[static_cast<std::size_t>(i)].phase == 0;
  out.main_phase[static_cast<std::size_t>(n)] = n > 0 ? out.main_phase[static_cast<std::size_t>(n) - 1] : 1;

  std::unordered_map<std::int64_t, const LongEdgeEvent*> events;
  for (const LongEdgeEvent& e : tr.long_edges) events[e.step] = &e;
  std::unordered_map<std::int64_t, Point> jump_at;
  for (const NewVertexRecord& nv : tr.new_vertices) {
    const auto it = events.find(nv.step);
    const VertexType* tilde = it == events.end() ? nullptr : &it->second->type_x;
    IncrementVariables inc = increment_variables(params, sc, grid, {cfg.seed, tr.ell, nv.cell, nv.iota}, nv.type,
                                                 types, reach, tilde);
    jump_at[nv.step] = inc.Z;
    out.hat_increments.push_back(std::move(inc));
  }
  out.x_hat.assign(static_cast<std::size_t>(n) + 1, Point{});
  for (std::int64_t i = 0; i < n; ++i) {
    Point next = out.x_hat[static_cast<std::size_t>(i)];
    const auto it = jump_at.find(i);
    if (it != jump_at.end()) next += it->second;
    out.x_hat[static_cast<std::size_t>(i) + 1] = next;
  }

  // Deterministic clocks floor(i C) per typed cell; the overflow cell is left out.
  std::vector<std::int64_t> used(static_cast<std::size_t>(grid.cells()), 0);
  out.x_frak.assign(static_cast<std::size_t>(n) + 1, Point{});
  Point acc;
  for (std::int64_t i = 0; i <= n; ++i) {
    for (int c = 1; c < grid.cells(); ++c) {
      const auto target = static_cast<std::int64_t>(std::floor(static_cast<double>(i) * rates[static_cast<std::size_t>(c)]));
      auto& u = used[static_cast<std::size_t>(c)];
      const auto [j, m] = grid.type_of_cell(c);
      while (u < target) {
        ++u;
        const IncrementVariables inc = increment_variables(params, sc, grid, {cfg.seed, tr.ell, c, u},
                                                           VertexType{grid.q(j - 1), m}, types, reach);
        acc += inc.Z_plus;
      }
    }
    out.x_frak[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

double coupling_gap(const DerivedPaths& paths) {
  double best = 0.0;
  const int d = kMaxDim;
  for (std::size_t i = 0; i < paths.x_hat.size(); ++i) {
    if (!paths.main_phase[i]) continue;
    best = std::max(best, static_cast<double>(sup_norm(paths.x_hat[i] - paths.x[i], d)));
  }
  return best;
}

KReport estimate_K(const TypeGrid& grid, const std::vector<double>& rates, const TypeSample& types,
                   std::int64_t trials, std::uint64_t seed, double max_atom_mass) {
  const int J = grid.J();
  if (J == 0) throw std::invalid_argument("estimate_K: empty grid");
  if (static_cast<int>(rates.size()) != grid.cells()) throw std::invalid_argument("estimate_K: type-rate table does not match the grid");
  if (trials < 1) throw std::invalid_argument("estimate_K: trials must be positive");
  std::vector<double> p;
  for (const VertexType& t : types.sample()) p.push_back(t.p);
  if (grid.atom_mass(p) > max_atom_mass) throw AtomCollisionError("estimate_K: grid point carries an atom; re-grid");

  KReport rep;
  rep.J = J;
  rep.q = grid.upper();
  rep.psi = grid.psi();
  rep.trials = trials;
  rep.sigma.assign(static_cast<std::size_t>(J), std::vector<double>(static_cast<std::size_t>(J), 0.0));
  rep.rates.assign(static_cast<std::size_t>(J), std::vector<double>(static_cast<std::size_t>(J), 0.0));
  for (int m = 1; m <= J; ++m) {
    // first[j] counts trials whose first exceeding edge is q_j; R grows with q.
    std::vector<std::int64_t> first(static_cast<std::size_t>(J) + 2, 0);
    const auto um = static_cast<std::uint64_t>(m);
    for (std::int64_t t = 0; t < trials; ++t) {
      const auto ut = static_cast<std::uint64_t>(t);
      Stream ts(seed, Role::type_sample, {um, ut});
      const VertexType tilde = types.draw(ts);
      GeomStream Rt(seed, Role::sigma, {1, um, ut});
      const std::int64_t rt = excursion_count(Rt, tilde.p, tilde.m);
      if (rt == kInfiniteCount) continue;
      GeomStream R(seed, Role::sigma, {0, um, ut});
      for (int j = 1; j <= J; ++j) {
        if (excursion_count(R, grid.q(j), m) > rt) {
          ++first[static_cast<std::size_t>(j)];
          break;
        }
      }
    }
    std::int64_t run = 0;
    for (int j = 1; j <= J; ++j) {
      run += first[static_cast<std::size_t>(j)];
      const auto jj = static_cast<std::size_t>(j - 1), mm = static_cast<std::size_t>(m - 1);
      rep.sigma[jj][mm] = static_cast<double>(run) / static_cast<double>(trials);
      rep.rates[jj][mm] = rates[static_cast<std::size_t>(grid.cell(j, m))];
      rep.K += rep.sigma[jj][mm] * rep.rates[jj][mm];
    }
  }
  return rep;
}

nlohmann::json to_json(const KReport& r) {
  return nlohmann::json{{"J", r.J},           {"q_grid", r.q},  {"sigma_table", r.sigma}, {"C_table", r.rates},
                        {"K_J", r.K},         {"psi_J", r.psi}, {"trials", r.trials}};
}

}  // namespace lrp
