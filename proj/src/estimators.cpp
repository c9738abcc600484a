#include "lrp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "lrp/lattice_law.hpp"

namespace lrp {

namespace {

// 1/H with H the mean log-excess of the top k over the (k+1)-th largest. v is scrambled.
double hill_value(std::vector<double>& v, std::size_t k) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), std::greater<>());
  const double base = v[k];
  double h = 0.0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(v[i] / base);
  h /= static_cast<double>(k);
  return h > 0.0 ? 1.0 / h : std::numeric_limits<double>::infinity();
}

struct SlopeWithError {
  LinearFit fit;
  double se = 0.0;
};

SlopeWithError fit_with_error(const std::vector<double>& x, const std::vector<double>& y) {
  SlopeWithError r;
  r.fit = least_squares(x, y);
  const std::size_t n = x.size();
  if (n < 3) return r;
  const double mx = mean(x);
  double sxx = 0.0, rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    const double e = y[i] - r.fit.intercept - r.fit.slope * x[i];
    rss += e * e;
  }
  r.se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  return r;
}

double column_statistic(const Eigen::MatrixXd& values, Eigen::Index col, const std::vector<std::size_t>* rows,
                        ScalingStatistic stat) {
  std::vector<double> v;
  const auto n = rows ? rows->size() : static_cast<std::size_t>(values.rows());
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rows ? static_cast<Eigen::Index>((*rows)[i]) : static_cast<Eigen::Index>(i);
    v.push_back(std::fabs(values(r, col)));
  }
  if (stat == ScalingStatistic::median) return median(std::move(v));
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TailEstimate hill_tail_index(std::span<const double> samples, double top_fraction, std::size_t bootstrap,
                             std::uint64_t seed) {
  if (samples.size() < 100) throw std::invalid_argument("hill_tail_index: need at least 100 samples");
  if (!(top_fraction > 0.0 && top_fraction <= 0.2)) throw std::domain_error("hill_tail_index: top_fraction in (0, 0.2]");
  for (double x : samples) {
    if (!(x > 0.0)) throw std::domain_error("hill_tail_index: samples must be positive");
  }
  TailEstimate est;
  est.n = samples.size();
  est.fraction = top_fraction;
  est.k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(top_fraction * static_cast<double>(est.n))));
  std::vector<double> v(samples.begin(), samples.end());
  est.alpha_hat = hill_value(v, est.k);
  if (!std::isfinite(est.alpha_hat)) throw std::domain_error("hill_tail_index: zero log-spacings (degenerate sample)");
  if (bootstrap > 0) {
    std::vector<double> buf(est.n);
    const Interval ci = bootstrap_interval(est.n, bootstrap, seed, [&](const std::vector<std::size_t>& idx) {
      for (std::size_t i = 0; i < idx.size(); ++i) buf[i] = samples[idx[i]];
      return hill_value(buf, est.k);
    });
    est.ci_half_width = ci.half_width();
  }
  return est;
}

std::vector<TailEstimate> hill_sensitivity(std::span<const double> samples, const std::vector<double>& fractions,
                                           std::size_t bootstrap, std::uint64_t seed) {
  std::vector<TailEstimate> out;
  for (double f : fractions) out.push_back(hill_tail_index(samples, f, bootstrap, seed));
  return out;
}

ScalingFit scaling_exponent(const std::vector<double>& n_grid, const Eigen::MatrixXd& values, ScalingStatistic stat,
                            std::size_t bootstrap, std::uint64_t seed) {
  if (n_grid.size() < 3) throw std::invalid_argument("scaling_exponent: need at least 3 grid points");
  if (static_cast<std::size_t>(values.cols()) != n_grid.size() || values.rows() < 1) {
    throw std::invalid_argument("scaling_exponent: values must be walks x grid");
  }
  ScalingFit out;
  out.n = n_grid;
  const auto [lo, hi] = std::minmax_element(n_grid.begin(), n_grid.end());
  out.short_span = std::log2(*hi / *lo) < 4.0;
  std::vector<double> lx;
  for (double n : n_grid) {
    if (!(n > 0.0)) throw std::domain_error("scaling_exponent: grid values must be positive");
    lx.push_back(std::log(n));
  }
  auto slope_for = [&](const std::vector<std::size_t>* rows, std::vector<double>* stats) {
    std::vector<double> ly;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      const double s = column_statistic(values, static_cast<Eigen::Index>(g), rows, stat);
      if (stats) stats->push_back(s);
      ly.push_back(std::log(std::max(s, 1e-300)));
    }
    return least_squares(lx, ly);
  };
  const LinearFit f = slope_for(nullptr, &out.statistic);
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.ci = {f.slope, f.slope};
  if (bootstrap > 0) {
    out.ci = bootstrap_interval(static_cast<std::size_t>(values.rows()), bootstrap, seed,
                                [&](const std::vector<std::size_t>& idx) { return slope_for(&idx, nullptr).slope; });
  }
  return out;
}

LocalReturn local_return(const BallGraph& g, std::optional<std::int64_t> cap, ReturnMode mode, std::int64_t trials,
                         Stream& stream) {
  LocalReturn r;
  r.ball_size = g.size();
  r.d_tilde = g.local_degree(0);
  if (r.d_tilde == 0) {
    r.p = 1.0;
    r.ci = {1.0, 1.0};
    r.no_local_neighbours = true;
    return r;
  }
  if (mode == ReturnMode::exact && g.size() > kExactBallLimit) {
    throw std::invalid_argument("return_probabilities: exact mode limited to balls of at most 2000 vertices");
  }
  const bool exact = mode == ReturnMode::exact || (mode == ReturnMode::automatic && g.size() <= kExactBallLimit);
  if (exact) {
    r.p = return_probability_exact(g, cap);
    r.ci = {r.p, r.p};
    r.exact = true;
  } else {
    const McEstimate est = return_probability_mc(g, cap, trials, stream);
    r.p = est.p;
    r.ci = est.ci;
    r.exact = false;
  }
  return r;
}

RateReport new_vertex_rates(const std::vector<WalkPath>& paths, const std::function<VertexType(const Point&)>& type_of,
                            const TypeGrid& grid, double chi, bool annealed) {
  if (grid.J() < 1) throw std::invalid_argument("new_vertex_rates: empty q grid");
  if (paths.empty()) throw std::invalid_argument("new_vertex_rates: no paths");
  RateReport rep;
  rep.annealed = annealed;
  rep.t = paths.front().steps();
  for (const auto& p : paths) rep.t = std::min(rep.t, p.steps());
  if (rep.t < 1) throw std::invalid_argument("new_vertex_rates: paths need at least one step");
  const std::int64_t T = rep.t;
  const int C = grid.cells();
  const std::size_t W = paths.size();

  // Per walk: the cell of each new vertex and the step it was found.
  std::vector<std::vector<std::pair<std::int64_t, int>>> events(W);
  std::unordered_map<Point, int, PointHash> cache;
  for (std::size_t l = 0; l < W; ++l) {
    if (annealed) cache.clear();
    const WalkPath& p = paths[l];
    for (std::int64_t i = 1; i <= T; ++i) {
      if (!p.is_new[static_cast<std::size_t>(i)]) continue;
      const Point& site = p.sites[static_cast<std::size_t>(i)];
      auto it = cache.find(site);
      if (it == cache.end()) it = cache.emplace(site, grid.cell_of(type_of(site))).first;
      events[l].emplace_back(i, it->second);
    }
  }

  rep.n_t.assign(W, 0);
  rep.cells.assign(W, std::vector<std::int64_t>(static_cast<std::size_t>(C), 0));
  rep.c_cell.assign(static_cast<std::size_t>(C), 0.0);
  for (std::size_t l = 0; l < W; ++l) {
    rep.n_t[l] = static_cast<std::int64_t>(events[l].size());
    for (auto [i, c] : events[l]) ++rep.cells[l][static_cast<std::size_t>(c)];
  }
  const double Td = static_cast<double>(T);
  for (std::size_t l = 0; l < W; ++l) {
    rep.c_star += static_cast<double>(rep.n_t[l]) / Td;
    for (int c = 0; c < C; ++c) rep.c_cell[static_cast<std::size_t>(c)] += static_cast<double>(rep.cells[l][static_cast<std::size_t>(c)]) / Td;
  }
  rep.c_star /= static_cast<double>(W);
  for (auto& x : rep.c_cell) x /= static_cast<double>(W);
  rep.c_bar = rep.c_cell[0];
  for (std::size_t l = 0; l < W; ++l) {
    const double dev = rep.c_star > 0.0 ? std::fabs(static_cast<double>(rep.n_t[l]) / Td - rep.c_star) / rep.c_star : 0.0;
    rep.max_relative_deviation = std::max(rep.max_relative_deviation, dev);
  }

  for (std::int64_t h = 16; h < T; h *= 2) rep.horizons.push_back(h);
  rep.horizons.push_back(T);
  const std::size_t H = rep.horizons.size();
  std::vector<std::size_t> passing(H, 0);
  rep.plateau.assign(H, 0.0);
  rep.h_sup.assign(W, 0.0);
  rep.h_pass.assign(W, 0);

  // Any union of cells: sup of |sum of deviations| = max(positive part, negative part).
  std::vector<double> count(static_cast<std::size_t>(C));
  for (std::size_t l = 0; l < W; ++l) {
    std::fill(count.begin(), count.end(), 0.0);
    std::size_t next_event = 0, hz = 0;
    double running = 0.0;
    for (std::int64_t t = 1; t <= T; ++t) {
      while (next_event < events[l].size() && events[l][next_event].first == t) {
        count[static_cast<std::size_t>(events[l][next_event].second)] += 1.0;
        ++next_event;
      }
      double pos = 0.0, neg = 0.0;
      const double td = static_cast<double>(t);
      for (int c = 0; c < C; ++c) {
        const double dev = count[static_cast<std::size_t>(c)] - td * rep.c_cell[static_cast<std::size_t>(c)];
        (dev > 0.0 ? pos : neg) += std::fabs(dev);
      }
      running = std::max(running, std::max(pos, neg));
      if (t == rep.horizons[hz]) {
        if (running <= chi * td) ++passing[hz];
        rep.plateau[hz] += static_cast<double>(next_event) / td;
        ++hz;
      }
    }
    rep.h_sup[l] = running / Td;
    rep.h_pass[l] = rep.h_sup[l] <= chi ? 1 : 0;
  }
  for (std::size_t h = 0; h < H; ++h) {
    rep.fraction_passing_by_horizon.push_back(static_cast<double>(passing[h]) / static_cast<double>(W));
    rep.plateau[h] /= static_cast<double>(W);
  }
  rep.fraction_passing = rep.fraction_passing_by_horizon.back();
  return rep;
}

std::vector<std::int64_t> dyadic_grid(int lo_exp, int hi_exp) {
  std::vector<std::int64_t> g;
  for (int e = lo_exp; e <= hi_exp; ++e) g.push_back(std::int64_t{1} << e);
  return g;
}

namespace {

void fit_heat_kernel(HeatKernelReport& rep) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(rep.t[i])));
    ly.push_back(std::log(rep.p[i]));
  }
  if (lx.size() < 2) throw std::invalid_argument("heat_kernel: need at least two usable grid points");
  const SlopeWithError f = fit_with_error(lx, ly);
  rep.slope = f.fit.slope;
  rep.ci = {f.fit.slope - 1.96 * f.se, f.fit.slope + 1.96 * f.se};
}

}  // namespace

HeatKernelReport heat_kernel_exact(const Environment& env, VertexId origin, const std::vector<std::int64_t>& t_grid,
                                   Coord window_radius) {
  if (t_grid.empty()) throw std::invalid_argument("heat_kernel_exact: empty t grid");
  if (env.degree(origin) < 1) throw IsolatedStartError("heat_kernel_exact: isolated origin");
  const int d = env.dimension();
  const VertexId V = env.vertex_count();
  const bool whole = window_radius <= 0 || 2 * window_radius + 1 >= env.params().L;

  std::vector<std::int32_t> local(static_cast<std::size_t>(V), -1);
  std::vector<VertexId> verts;
  for (VertexId v = 0; v < V; ++v) {
    if (whole || sup_norm(env.displacement(origin, v), d) <= window_radius) {
      local[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(verts.size());
      verts.push_back(v);
    }
  }
  const std::size_t n = verts.size();
  std::vector<std::uint64_t> off(n + 1, 0);
  std::vector<std::int32_t> adj;
  std::vector<double> deg(n);
  std::vector<std::uint8_t> boundary(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId v = verts[i];
    const std::int64_t full = env.degree(v);
    for (std::int64_t k = 0; k < full; ++k) {
      const std::int32_t w = local[static_cast<std::size_t>(env.neighbor(v, k))];
      if (w >= 0) adj.push_back(w);
    }
    off[i + 1] = adj.size();
    deg[i] = static_cast<double>(off[i + 1] - off[i]);
    boundary[i] = static_cast<std::int64_t>(off[i + 1] - off[i]) < full;
  }
  const std::int32_t o = local[static_cast<std::size_t>(origin)];

  HeatKernelReport rep;
  rep.exact = true;
  rep.window_vertices = static_cast<std::int64_t>(n);

  // Two-colouring of the origin's component.
  {
    std::vector<std::int8_t> colour(n, -1);
    std::vector<std::int32_t> queue{o};
    colour[static_cast<std::size_t>(o)] = 0;
    rep.bipartite = true;
    for (std::size_t h = 0; h < queue.size() && rep.bipartite; ++h) {
      const auto u = static_cast<std::size_t>(queue[h]);
      for (std::uint64_t e = off[u]; e < off[u + 1]; ++e) {
        const auto w = static_cast<std::size_t>(adj[e]);
        if (colour[w] < 0) {
          colour[w] = static_cast<std::int8_t>(1 - colour[u]);
          queue.push_back(static_cast<std::int32_t>(w));
        } else if (colour[w] == colour[u]) {
          rep.bipartite = false;
          break;
        }
      }
    }
  }

  const std::int64_t t_max = *std::max_element(t_grid.begin(), t_grid.end()) + (rep.bipartite ? 0 : 1);
  // Reversibility: P_{2s}(o,o) = sum_v P_s(o,v)^2 deg(o)/deg(v), P_{2s-1} = sum_v P_{s-1} P_s deg(o)/deg(v).
  std::vector<double> ret(static_cast<std::size_t>(t_max) + 2, 0.0);
  std::vector<double> prev(n, 0.0), cur(n, 0.0), share(n, 0.0);
  cur[static_cast<std::size_t>(o)] = 1.0;
  ret[0] = 1.0;
  const double d0 = deg[static_cast<std::size_t>(o)];
  for (std::int64_t s = 1; 2 * s - 1 <= t_max; ++s) {
    for (std::size_t i = 0; i < n; ++i) share[i] = deg[i] > 0.0 ? cur[i] / deg[i] : 0.0;
    prev.swap(cur);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::uint64_t e = off[i]; e < off[i + 1]; ++e) acc += share[static_cast<std::size_t>(adj[e])];
      cur[i] = acc;
    }
    double even = 0.0, odd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (cur[i] == 0.0 || deg[i] == 0.0) continue;
      even += cur[i] * cur[i] / deg[i];
      odd += prev[i] * cur[i] / deg[i];
    }
    ret[static_cast<std::size_t>(2 * s - 1)] = odd * d0;
    if (2 * s <= t_max + 1) ret[static_cast<std::size_t>(2 * s)] = even * d0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (boundary[i]) rep.boundary_mass += cur[i];
  }

  for (std::int64_t t : t_grid) {
    if (t < 1) throw std::invalid_argument("heat_kernel_exact: t must be >= 1");
    if (rep.bipartite && (t % 2 != 0)) continue;
    const double p = rep.bipartite ? ret[static_cast<std::size_t>(t)]
                                   : 0.5 * (ret[static_cast<std::size_t>(t)] + ret[static_cast<std::size_t>(t) + 1]);
    rep.t.push_back(t);
    rep.p.push_back(p);
  }
  fit_heat_kernel(rep);
  return rep;
}

HeatKernelReport heat_kernel_mc(const Environment& env, VertexId origin, const std::vector<std::int64_t>& t_grid,
                                std::int64_t trials, std::uint64_t seed) {
  if (t_grid.empty()) throw std::invalid_argument("heat_kernel_mc: empty t grid");
  if (env.degree(origin) < 1) throw IsolatedStartError("heat_kernel_mc: isolated origin");
  const std::int64_t t_max = *std::max_element(t_grid.begin(), t_grid.end()) + 1;
  std::vector<double> hits(static_cast<std::size_t>(t_max) + 1, 0.0);
  for (std::int64_t r = 0; r < trials; ++r) {
    Stream s(seed, Role::walk, {static_cast<std::uint64_t>(r)});
    VertexId v = origin;
    for (std::int64_t t = 1; t <= t_max; ++t) {
      v = env.neighbor(v, static_cast<std::int64_t>(s.below(static_cast<std::uint64_t>(env.degree(v)))));
      if (v == origin) hits[static_cast<std::size_t>(t)] += 1.0;
    }
  }
  HeatKernelReport rep;
  rep.exact = false;
  // Treated as bipartite when no odd-time return was observed.
  bool odd_seen = false;
  for (std::int64_t t = 1; t <= t_max; t += 2) odd_seen = odd_seen || hits[static_cast<std::size_t>(t)] > 0.0;
  rep.bipartite = !odd_seen;
  for (std::int64_t t : t_grid) {
    if (rep.bipartite && t % 2 != 0) continue;
    const double p = rep.bipartite
                         ? hits[static_cast<std::size_t>(t)] / static_cast<double>(trials)
                         : 0.5 * (hits[static_cast<std::size_t>(t)] + hits[static_cast<std::size_t>(t) + 1]) /
                               static_cast<double>(trials);
    if (p == 0.0) {
      throw ZeroReturnsError("heat_kernel_mc: no returns at t = " + std::to_string(t) +
                             "; widen trials or truncate the grid");
    }
    rep.t.push_back(t);
    rep.p.push_back(p);
  }
  fit_heat_kernel(rep);
  return rep;
}

double small_jump_mass(const WalkPath& path, Coord rho, double alpha, std::int64_t n) {
  if (rho < 1) throw std::domain_error("small_jump_mass: rho must be >= 1");
  if (n < 0) n = path.steps();
  if (n > path.steps()) throw std::invalid_argument("small_jump_mass: path shorter than n");
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    const Coord j = path.jump[static_cast<std::size_t>(i)];
    if (j <= rho) s += static_cast<double>(j);
  }
  return s / std::pow(static_cast<double>(n), 1.0 / alpha);
}

SmallJumpTrend small_jump_trend(const std::vector<WalkPath>& paths, Coord rho, double alpha,
                                const std::vector<std::int64_t>& n_grid) {
  SmallJumpTrend tr;
  tr.n = n_grid;
  for (std::int64_t n : n_grid) {
    std::vector<double> v;
    for (const auto& p : paths) v.push_back(small_jump_mass(p, rho, alpha, n));
    tr.median.push_back(median(std::move(v)));
  }
  tr.strictly_decreasing = true;
  for (std::size_t i = 1; i < tr.median.size(); ++i) tr.strictly_decreasing = tr.strictly_decreasing && tr.median[i] < tr.median[i - 1];
  tr.ratio = tr.median.empty() || tr.median.front() == 0.0 ? 0.0 : tr.median.back() / tr.median.front();
  return tr;
}

ZmaxReport zmax_tail_check(std::span<const double> samples, double alpha, double fit_lo, double fit_hi,
                           std::size_t min_exceedances, int grid_points) {
  if (!(alpha > 0.0)) throw std::domain_error("zmax_tail_check: alpha must be positive");
  if (!(fit_lo > 0.0 && fit_hi > fit_lo)) throw std::invalid_argument("zmax_tail_check: bad fit window");
  ZmaxReport rep;
  rep.alpha = alpha;
  rep.fit_lo = fit_lo;
  rep.fit_hi = fit_hi;
  rep.n = samples.size();
  if (samples.empty()) {
    rep.degenerate = true;
    return rep;
  }
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double N = static_cast<double>(x.size());
  auto survival = [&](double y) {
    return static_cast<double>(x.end() - std::upper_bound(x.begin(), x.end(), y)) / N;
  };
  rep.check_hi = fit_hi;
  if (x.size() > min_exceedances) rep.check_hi = std::max(fit_hi, x[x.size() - 1 - min_exceedances]);

  const int half = std::max(2, grid_points / 2);
  for (int i = 0; i < half; ++i) rep.y.push_back(fit_lo * std::pow(fit_hi / fit_lo, static_cast<double>(i) / (half - 1)));
  const std::size_t fit_points = rep.y.size();
  if (rep.check_hi > fit_hi) {
    for (int i = 1; i <= half; ++i) rep.y.push_back(fit_hi * std::pow(rep.check_hi / fit_hi, static_cast<double>(i) / half));
  }
  for (double y : rep.y) rep.survival.push_back(survival(y));
  for (std::size_t i = 0; i < fit_points; ++i) rep.c = std::max(rep.c, rep.survival[i] * std::pow(rep.y[i], alpha));
  rep.degenerate = survival(fit_hi) == 0.0;
  for (std::size_t i = 0; i < rep.y.size(); ++i) {
    const double env = rep.c * std::pow(rep.y[i], -alpha);
    rep.envelope.push_back(env);
    const double S = rep.survival[i];
    const double se = std::sqrt(S * (1.0 - S) / N) + 1.0 / N;
    if (!rep.degenerate && S - env > 3.0 * se) ++rep.violations;
  }
  return rep;
}

std::vector<double> normalized_jump_sums(const ModelParams& params, Coord rho, std::int64_t n, std::size_t count,
                                         std::uint64_t seed, double alpha, Coord r_max) {
  std::vector<double> out(count);
  const double norm = std::pow(static_cast<double>(n), -1.0 / alpha);
  for (std::size_t c = 0; c < count; ++c) {
    Stream s(seed, Role::coupling_w, {c});
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      sample_bernoulli_field(params, rho, r_max, s, [&](const Point& z) { total += norm_of(z, params.d, params.norm); });
    }
    out[c] = total * norm;
  }
  return out;
}

namespace {

// h(i) = P_i(hit g before 0) on the gap graph with vertices 0..g.
std::vector<double> gap_harmonic(int g, const std::vector<std::vector<int>>& adj) {
  const int m = g - 1;
  std::vector<double> h(static_cast<std::size_t>(g) + 1, 0.0);
  h[static_cast<std::size_t>(g)] = 1.0;
  if (m == 0) return h;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  if (m <= 16) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < g; ++i) {
      A(i - 1, i - 1) = static_cast<double>(adj[static_cast<std::size_t>(i)].size());
      for (int w : adj[static_cast<std::size_t>(i)]) {
        if (w == g) b[i - 1] += 1.0;
        else if (w != 0) A(i - 1, w - 1) -= 1.0;
      }
    }
    const Eigen::VectorXd x = A.ldlt().solve(b);
    for (int i = 1; i < g; ++i) h[static_cast<std::size_t>(i)] = x[i - 1];
    return h;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 1; i < g; ++i) {
    trip.emplace_back(i - 1, i - 1, static_cast<double>(adj[static_cast<std::size_t>(i)].size()));
    for (int w : adj[static_cast<std::size_t>(i)]) {
      if (w == g) b[i - 1] += 1.0;
      else if (w != 0) trip.emplace_back(i - 1, w - 1, -1.0);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw ModelViolationError("cutpoint_chain: singular gap system");
  const Eigen::VectorXd x = solver.solve(b);
  for (int i = 1; i < g; ++i) h[static_cast<std::size_t>(i)] = x[i - 1];
  return h;
}

}  // namespace

CutpointChain cutpoint_chain(const Environment& env) {
  const CutpointSet cs = detect_cutpoints(env);
  const Coord L = env.params().L;
  CutpointChain ch;
  ch.cyclic = env.params().boundary == Boundary::torus;
  for (Coord c : cs.points) {
    // A free-boundary end vertex has a single neighbour and cannot carry the chain.
    if (env.degree(c) == 2) ch.cutpoints.push_back(c);
  }
  if (ch.cutpoints.size() < 2) throw std::invalid_argument("cutpoint_chain: fewer than two cutpoints");
  const std::size_t nc = ch.cutpoints.size();
  const std::size_t ngaps = ch.cyclic ? nc : nc - 1;

  for (std::size_t j = 0; j < ngaps; ++j) {
    const Coord a = ch.cutpoints[j];
    const Coord b = j + 1 < nc ? ch.cutpoints[j + 1] : ch.cutpoints[0] + L;
    const Coord g = b - a;
    ch.gaps.push_back(g);
    double qf = 0.5, qb = 0.5;
    if (g > 1) {
      if (g > (Coord{1} << 30)) throw ModelViolationError("cutpoint_chain: gap too large");
      const int gi = static_cast<int>(g);
      std::vector<std::vector<int>> adj(static_cast<std::size_t>(gi) + 1);
      for (int i = 1; i < gi; ++i) {
        const VertexId v = (a + i) % L;
        const std::int64_t deg = env.degree(v);
        for (std::int64_t k = 0; k < deg; ++k) {
          const VertexId w = env.neighbor(v, k);
          Coord li = w - a;
          if (ch.cyclic) li = ((li % L) + L) % L;
          if (li < 0 || li > g) throw ModelViolationError("cutpoint_chain: edge leaves its gap");
          adj[static_cast<std::size_t>(i)].push_back(static_cast<int>(li));
        }
      }
      const std::vector<double> h = gap_harmonic(gi, adj);
      qf = h[1] / static_cast<double>(env.degree(a));
      qb = (1.0 - h[static_cast<std::size_t>(gi) - 1]) / static_cast<double>(env.degree(b % L));
      if (!(qf > 0.0) || !(qb > 0.0)) throw ModelViolationError("cutpoint_chain: gap disconnected from its cutpoints");
    }
    ch.q_forward.push_back(qf);
    ch.q_backward.push_back(qb);
    ch.max_symmetry_error = std::max(ch.max_symmetry_error, std::fabs(qf - qb));
    if (1.0 / qf > 2.0 * static_cast<double>(g) * (1.0 + 1e-12)) {
      ch.resistance_bound = false;
      ++ch.bound_violations;
    }
  }

  ch.p.push_back(0.0);
  for (std::size_t j = 0; j < ngaps; ++j) ch.p.push_back(ch.p.back() + 1.0 / ch.q_forward[j]);
  double gap_sum = 0.0;
  for (Coord g : ch.gaps) gap_sum += static_cast<double>(g);
  ch.mean_gap = gap_sum / static_cast<double>(ngaps);
  ch.mean_p_spacing = ch.p.back() / static_cast<double>(ngaps);
  ch.k_star = 2.0 * ch.mean_gap * ch.mean_gap / ch.mean_p_spacing;

  // Interior cutpoints see a gap on both sides.
  double qv = 0.0;
  std::size_t interior = 0;
  for (std::size_t j = 0; j < nc; ++j) {
    if (!ch.cyclic && (j == 0 || j + 1 == nc)) continue;
    const std::size_t left = j == 0 ? ngaps - 1 : j - 1;
    const double up = ch.q_forward[j], down = ch.q_backward[left];
    ch.q_stay.push_back(1.0 - up - down);
    qv += 1.0 / up + 1.0 / down;
    ++interior;
  }
  ch.quadratic_variation = interior ? qv / static_cast<double>(interior) : 0.0;

  double total_deg = 0.0, cut_deg = 0.0;
  for (VertexId v = 0; v < env.vertex_count(); ++v) total_deg += static_cast<double>(env.degree(v));
  for (Coord c : ch.cutpoints) cut_deg += static_cast<double>(env.degree(c));
  ch.cutpoint_time_fraction = cut_deg / total_deg;
  return ch;
}

DiffusivityFit variance_diffusivity(const Environment& env, const std::vector<std::int64_t>& n_grid, std::size_t walks,
                                    std::uint64_t seed) {
  if (n_grid.size() < 2) throw std::invalid_argument("variance_diffusivity: need at least two grid points");
  if (walks < 2) throw std::invalid_argument("variance_diffusivity: need at least two walks");
  std::vector<std::int64_t> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  std::vector<std::vector<double>> x(grid.size(), std::vector<double>(walks));
  for (std::size_t w = 0; w < walks; ++w) {
    Stream pick(seed, Role::selection, {w});
    VertexId v;
    do {
      v = static_cast<VertexId>(pick.below(static_cast<std::uint64_t>(env.vertex_count())));
    } while (env.degree(v) == 0);
    Stream s(seed, Role::walk, {w});
    Point pos{};
    std::size_t gi = 0;
    for (std::int64_t t = 1; t <= grid.back(); ++t) {
      const VertexId u = env.neighbor(v, static_cast<std::int64_t>(s.below(static_cast<std::uint64_t>(env.degree(v)))));
      pos = pos + env.displacement(v, u);
      v = u;
      while (gi < grid.size() && grid[gi] == t) x[gi++][w] = static_cast<double>(pos[0]);
    }
  }
  DiffusivityFit fit;
  fit.walks = walks;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    fit.n.push_back(static_cast<double>(grid[g]));
    fit.variance.push_back(variance(x[g]));
  }
  fit.sigma2 = least_squares(fit.n, fit.variance).slope;
  return fit;
}

MarginalComparison marginal_compare(const Eigen::MatrixXd& sim, const Eigen::MatrixXd& reference,
                                    const std::vector<double>& t_list, double q) {
  if (q < 1.0) throw std::domain_error("marginal_compare: q must be >= 1");
  if (static_cast<std::size_t>(sim.cols()) != t_list.size() || reference.cols() != sim.cols()) {
    throw std::invalid_argument("marginal_compare: one column per t");
  }
  MarginalComparison out;
  out.t = t_list;
  const double n = static_cast<double>(sim.rows()), m = static_cast<double>(reference.rows());
  double prev_t = 0.0, acc = 0.0;
  constexpr int kLevels = 99;
  for (std::size_t c = 0; c < t_list.size(); ++c) {
    const double t = t_list[c];
    if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("marginal_compare: t must lie in (0, 1]");
    if (!(t > prev_t)) throw std::invalid_argument("marginal_compare: t_list must increase");
    const auto col = static_cast<Eigen::Index>(c);
    std::vector<double> a(sim.col(col).data(), sim.col(col).data() + sim.rows());
    std::vector<double> b(reference.col(col).data(), reference.col(col).data() + reference.rows());
    out.ks.push_back(ks_two_sample(a, b));
    out.ks_critical.push_back(1.358 * std::sqrt((n + m) / (n * m)));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double cell = 0.0;
    for (int l = 1; l <= kLevels; ++l) {
      const double u = static_cast<double>(l) / (kLevels + 1);
      cell += std::pow(std::fabs(quantile_sorted(a, u) - quantile_sorted(b, u)), q);
    }
    acc += (t - prev_t) * cell / kLevels;
    prev_t = t;
  }
  out.lq_quantile = std::pow(acc, 1.0 / q);
  return out;
}

Eigen::MatrixXd marginals_at(const std::vector<WalkPath>& paths, double a, const std::vector<double>& t_list) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(paths.size()), static_cast<Eigen::Index>(t_list.size()));
  for (std::size_t w = 0; w < paths.size(); ++w) {
    const std::int64_t n = paths[w].steps();
    const double scale = std::pow(static_cast<double>(n), -a);
    for (std::size_t c = 0; c < t_list.size(); ++c) {
      const auto i = static_cast<std::size_t>(std::floor(static_cast<double>(n) * t_list[c]));
      out(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c)) =
          static_cast<double>(paths[w].positions[std::min(i, paths[w].positions.size() - 1)][0]) * scale;
    }
  }
  return out;
}

}  // namespace lrp
