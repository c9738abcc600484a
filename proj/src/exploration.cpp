#include "lrp/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "lrp/lattice_law.hpp"

namespace lrp {

Scales scale_parameters(int k, double s, int d, std::optional<double> gamma, std::optional<Coord> rho_override,
                        Coord rho_floor) {
  if (!(s > d && s < d + 1)) throw UnsupportedError("exploration needs s in (d, d+1)");
  if (k < 1) throw std::invalid_argument("scale_parameters: k must be >= 1");
  if (rho_floor < 1) throw std::invalid_argument("scale_parameters: rho floor must be >= 1");
  Scales sc;
  sc.k = k;
  sc.alpha = s - d;
  const double log2_rho = k / sc.alpha - 200.0 / (1.0 - sc.alpha) * std::log2(static_cast<double>(k));
  sc.rho_formula = std::exp2(log2_rho);
  if (rho_override) {
    if (*rho_override < 1) throw std::invalid_argument("scale_parameters: rho must be >= 1");
    sc.rho = *rho_override;
    sc.rho_overridden = true;
  } else if (!(sc.rho_formula >= static_cast<double>(rho_floor))) {
    sc.rho = rho_floor;
    sc.rho_clamped = true;
  } else {
    sc.rho = static_cast<Coord>(std::min(sc.rho_formula, 9.0e18));
  }
  sc.delta = std::min(0.5 * (1.0 / sc.alpha - 1.0), 0.5);
  sc.gamma = gamma.value_or(sc.delta / 8.0);
  if (!(sc.gamma > 0.0)) throw std::invalid_argument("scale_parameters: gamma must be positive");
  sc.ball_scale = std::exp2(sc.delta * k);
  sc.ball_radius = static_cast<Coord>(std::floor(sc.ball_scale));
  sc.return_window = std::exp2(sc.gamma * k);
  sc.return_cap = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(sc.return_window)) - 1);
  sc.phase_scale = std::exp2(sc.gamma * k + 1.0);
  sc.phase_length = static_cast<std::int64_t>(std::floor(sc.phase_scale));
  sc.small_ball = sc.ball_radius < 2;
  sc.overlapping_balls = sc.rho < 2 * sc.ball_radius;
  return sc;
}

// ---- state ----

namespace {

std::uint64_t point_key(const Point& p) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(p.x[0]) ^ 0x5851F42D4C957F2DULL);
  h = mix64(h ^ static_cast<std::uint64_t>(p.x[1]));
  return mix64(h ^ static_cast<std::uint64_t>(p.x[2]));
}

bool torus_backend(const ExplorationConfig& c) {
  if (c.backend == ExplorationBackend::keyed_torus) return c.params.boundary == Boundary::torus;
  if (c.backend == ExplorationBackend::materialized) return c.env->params().boundary == Boundary::torus;
  return false;
}

}  // namespace

ExplorationState::ExplorationState(const ExplorationConfig& config, const Scales& scales, TypeGrid grid)
    : config_(config), scales_(scales), grid_(std::move(grid)) {
  if (config_.backend == ExplorationBackend::materialized) {
    if (config_.env == nullptr) throw std::invalid_argument("exploration: materialized backend needs an environment");
    config_.params = config_.env->params();
  }
  if (config_.backend == ExplorationBackend::lazy_zd && config_.source == LongEdgeSource::oracle) {
    throw std::invalid_argument("exploration: the lazy Z^d backend has no long-edge oracle");
  }
  config_.params.validate();
  if (config_.backend != ExplorationBackend::lazy_zd && config_.params.L < 2 * scales_.ball_radius + 2) {
    throw std::invalid_argument("exploration: torus too small for the neighbourhood balls");
  }
}

Point ExplorationState::site(const Point& p) const {
  if (torus_backend(config_)) return config_.params.torus().reduce(p);
  return p;
}

Point ExplorationState::offset(const Point& from, const Point& to) const {
  if (torus_backend(config_)) return config_.params.torus().displacement(from, to);
  return to - from;
}

bool ExplorationState::forced(const Point& a, const Point& b) const {
  if (!config_.params.nn_prob_one || !is_unit(offset(a, b), dimension())) return false;
  if (config_.backend == ExplorationBackend::materialized && config_.params.boundary == Boundary::free) {
    return config_.env->inside(a) && config_.env->inside(b);
  }
  return true;
}

bool ExplorationState::backend_edge(const Point& a, const Point& b) const {
  const Point z = offset(a, b);
  switch (config_.backend) {
    case ExplorationBackend::materialized: {
      if (!config_.env->inside(a) || !config_.env->inside(b)) return false;
      return config_.env->has_edge(config_.env->id(a), config_.env->id(b));
    }
    case ExplorationBackend::keyed_torus: {
      const Torus t = config_.params.torus();
      const double p = connection_probability(norm_of(z, dimension(), config_.params.norm), config_.params);
      return edge_uniform(config_.seed, static_cast<std::uint64_t>(t.index(a)), static_cast<std::uint64_t>(t.index(b))) < p;
    }
    case ExplorationBackend::lazy_zd:
    default: {
      const double p = connection_probability(norm_of(z, dimension(), config_.params.norm), config_.params);
      return edge_uniform(config_.seed, point_key(a), point_key(b)) < p;
    }
  }
}

std::optional<bool> ExplorationState::edge(const Point& a, const Point& b) const {
  if (a == b) return false;
  if (forced(a, b)) return true;
  const auto it = registry_.find(key(a, b));
  if (it != registry_.end()) return it->second;
  if (full(a) || full(b)) return false;
  return std::nullopt;
}

void ExplorationState::set_edge(const Point& a, const Point& b, bool open) {
  registry_[key(a, b)] = open;
  if (open) {
    open_[a].push_back(b);
    open_[b].push_back(a);
  }
}

std::vector<Point> ExplorationState::neighbours(const Point& u) const {
  const int d = dimension();
  std::vector<Point> out;
  if (config_.params.nn_prob_one) {
    for (int c = 0; c < d; ++c) {
      for (int sgn : {-1, 1}) {
        Point y = u;
        y[c] += sgn;
        y = site(y);
        if (forced(u, y)) out.push_back(y);
      }
    }
  }
  const auto it = open_.find(u);
  if (it != open_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  std::sort(out.begin(), out.end(), [&](const Point& a, const Point& b) { return offset(u, a) < offset(u, b); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Point> ExplorationState::long_neighbours(const Point& u) const {
  std::vector<Point> out;
  for (const Point& y : neighbours(u)) {
    if (distance(u, y) > scales_.rho) out.push_back(y);
  }
  return out;
}

void ExplorationState::reveal_ball(const Point& u) {
  std::vector<Point> ball;
  for_each_in_box(dimension(), scales_.ball_radius, [&](const Point& z) { ball.push_back(site(u + z)); });
  for (std::size_t a = 0; a < ball.size(); ++a) {
    for (std::size_t b = a + 1; b < ball.size(); ++b) {
      if (!edge(ball[a], ball[b])) set_edge(ball[a], ball[b], backend_edge(ball[a], ball[b]));
    }
  }
}

std::vector<Point> ExplorationState::make_full(const Point& u, Stream* long_stream) {
  if (full(u)) {
    std::vector<Point> out;
    for (const Point& y : long_neighbours(u)) out.push_back(offset(u, y));
    return out;
  }
  std::vector<Point> named;
  if (config_.source == LongEdgeSource::oracle) {
    if (config_.backend == ExplorationBackend::materialized) {
      const Environment& env = *config_.env;
      const VertexId id = env.id(u);
      for (VertexId w : env.stored_neighbors(id)) {
        const Point y = env.point(w);
        if (!edge(u, y)) set_edge(u, y, true);
      }
    } else {
      const Torus t = config_.params.torus();
      for (VertexId id = 0; id < t.volume(); ++id) {
        const Point y = t.point(id);
        if (y != u && !edge(u, y)) set_edge(u, y, backend_edge(u, y));
      }
    }
    full_.insert(u);
    for (const Point& y : long_neighbours(u)) named.push_back(offset(u, y));
    return named;
  }
  const Coord reach = config_.backend == ExplorationBackend::lazy_zd ? config_.r_max : (config_.params.L - 1) / 2;
  const Coord R = scales_.ball_radius;
  const Coord rho = scales_.rho;
  // Edges between the ball and rho: one field per site.
  if (rho > R && reach > R) {
    Stream mid(config_.seed, Role::reveal_pair, {point_key(u)});
    sample_bernoulli_field(config_.params, R, std::min(rho, reach), mid, [&](const Point& z) {
      const Point y = site(u + z);
      if (!edge(u, y)) set_edge(u, y, true);
    });
  }
  if (reach > rho) {
    Stream own(config_.seed, Role::reveal_vertex, {point_key(u)});
    Stream& s = long_stream != nullptr ? *long_stream : own;
    sample_bernoulli_field(config_.params, rho, reach, s, [&](const Point& z) {
      named.push_back(z);
      const Point y = site(u + z);
      if (!edge(u, y)) set_edge(u, y, true);
    });
  }
  full_.insert(u);
  return named;
}

BallGraph ExplorationState::ball_graph(const Point& u) const {
  std::vector<Point> ball{u};
  for_each_in_box(dimension(), scales_.ball_radius, [&](const Point& z) {
    if (sup_norm(z, dimension()) > 0) ball.push_back(site(u + z));
  });
  std::vector<std::pair<int, int>> edges;
  for (std::size_t a = 0; a < ball.size(); ++a) {
    for (std::size_t b = a + 1; b < ball.size(); ++b) {
      if (edge(ball[a], ball[b]).value_or(false)) edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  BallGraph g = BallGraph::from_edges(static_cast<int>(ball.size()), edges);
  for (std::size_t a = 0; a < ball.size(); ++a) g.offsets[a] = offset(u, ball[a]);
  return g;
}

VertexType ExplorationState::local_type(const Point& u, Stream& mc) const {
  const LocalReturn r = local_return(ball_graph(u), scales_.return_cap, config_.mode, config_.mc_trials, mc);
  return VertexType{r.p, r.d_tilde};
}

std::vector<VertexType> sample_type_law(const ExplorationConfig& config, const Scales& scales, std::size_t count,
                                        std::uint64_t seed) {
  ExplorationState probe(config, scales, TypeGrid{});
  Stream pick(seed, Role::selection);
  Stream mc(seed, Role::trial);
  std::vector<VertexType> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Point u;
    if (config.backend == ExplorationBackend::lazy_zd) {
      // Far-apart sites of the same lazy environment.
      u[0] = static_cast<Coord>(c + 1) << 32;
      u[0] += static_cast<Coord>(pick.below(1u << 20));
    } else {
      const ModelParams& p = config.backend == ExplorationBackend::materialized ? config.env->params() : config.params;
      u = p.torus().point(static_cast<VertexId>(pick.below(static_cast<std::uint64_t>(p.volume()))));
    }
    probe.reveal_ball(u);
    out.push_back(probe.local_type(u, mc));
  }
  return out;
}

// ---- the coupled exploration ----

class Explorer {
 public:
  Explorer(ExplorationState& st, std::int64_t steps) : st_(st), n_(steps) {}

  void run_walk(std::uint64_t ell);

 private:
  struct Special {
    bool active = false;
    std::int64_t start = 0;
    std::int64_t t = 0;
    VStar g;
    std::vector<Point> vstar_sites;
    std::unordered_map<Point, int, PointHash> id;
    CoupledVStarWalk y;
    bool synced = true;
    std::int64_t tau = 0;
    std::size_t event = 0;
    Point v, x;
  };

  bool near_w_plus(const Point& x, const Point& v) const;
  void visit(const Point& v);
  void start_special(WalkTranscript& tr, std::int64_t i, const Point& v, const Point& x, const VertexType& tv,
                     const VertexType& tx, int cell, std::int64_t iota, const Point& z);
  Point special_step(WalkTranscript& tr, StepRecord& rec, const Point& v, Stream& walk);
  void add_error(WalkTranscript& tr, StepRecord& rec, int code) {
    ++tr.errors[static_cast<std::size_t>(code)];
    if (rec.B == 0) rec.B = static_cast<std::uint8_t>(code);
  }

  const std::vector<Point>& options(const Point& v);

  ExplorationState& st_;
  std::int64_t n_;
  std::vector<Point> nb_;
  std::uint64_t ell_ = 0;
  Special sp_;
};

bool Explorer::near_w_plus(const Point& x, const Point& v) const {
  const int d = st_.dimension();
  const auto reach = static_cast<Coord>(std::floor(std::exp2(st_.scales().delta * st_.scales().k + 1.0)));
  if (st_.distance(x, v) <= reach) return true;
  if (static_cast<double>(st_.w_plus_.size()) < std::pow(2.0 * reach + 1.0, d)) {
    for (const Point& w : st_.w_plus_) {
      if (st_.distance(x, w) <= reach) return true;
    }
    return false;
  }
  bool hit = false;
  for_each_in_box(d, reach, [&](const Point& z) {
    if (!hit && st_.in_w_plus(st_.site(x + z))) hit = true;
  });
  return hit;
}

const std::vector<Point>& Explorer::options(const Point& v) {
  nb_ = st_.neighbours(v);
  if (nb_.empty()) throw IsolatedStartError("exploration: walk reached a vertex without neighbours");
  return nb_;
}

void Explorer::visit(const Point& v) {
  st_.visited_.insert(v);
  st_.w_plus_.insert(v);
  for (const Point& y : st_.long_neighbours(v)) st_.w_plus_.insert(y);
}

void Explorer::start_special(WalkTranscript& tr, std::int64_t i, const Point& v, const Point& x, const VertexType& tv,
                             const VertexType& tx, int cell, std::int64_t iota, const Point& z) {
  const Scales& sc = st_.scales();
  const std::uint64_t seed = st_.config().seed;
  sp_ = Special{};
  sp_.active = true;
  sp_.start = i;
  sp_.v = v;
  sp_.x = x;
  sp_.g = join_balls(st_.ball_graph(v), st_.ball_graph(x));
  auto add_side = [&](const Point& root, const BallGraph& b) {
    for (int a = 0; a < b.size(); ++a) {
      const Point s = st_.site(root + b.offsets[static_cast<std::size_t>(a)]);
      sp_.id.emplace(s, static_cast<int>(sp_.vstar_sites.size()));
      sp_.vstar_sites.push_back(s);
    }
  };
  add_side(v, sp_.g.a);
  add_side(x, sp_.g.b);

  const auto [j, m] = st_.grid().type_of_cell(cell);
  const auto uj = static_cast<std::uint64_t>(j), um = static_cast<std::uint64_t>(m);
  const std::int64_t limit = sc.phase_length + 2;
  const double pv = excursion_parameter_or_zero(tv.p, tv.m);
  const double px = excursion_parameter_or_zero(tx.p, tx.m);
  GeomStream rs(seed, Role::coupling_R, {ell_, uj, um, static_cast<std::uint64_t>(iota)});
  GeomStream rt(seed, Role::coupling_Rtilde, {ell_, uj, um, static_cast<std::uint64_t>(iota)});
  const std::int64_t R_v = pv > 0.0 ? rs.value(pv, limit) : limit;
  const std::int64_t R_x = px > 0.0 ? rt.value(px, limit) : limit;
  Stream ys(seed, Role::vstar, {ell_, static_cast<std::uint64_t>(i)});
  sp_.y = coupled_vstar_walk(sp_.g, R_v, R_x, sc.return_cap, sc.phase_length + 1, ys);

  LongEdgeEvent ev;
  ev.step = i;
  ev.v = v;
  ev.x = x;
  ev.offset = z;
  ev.type_v = tv;
  ev.type_x = tx;
  ev.cell = cell;
  ev.iota = iota;
  ev.R_v = R_v;
  ev.R_x = R_x;
  ev.x_side = R_v > R_x;
  ev.tau_star = sp_.y.tau_star;
  ev.tau = sc.phase_length;
  tr.long_edges.push_back(ev);
  sp_.event = tr.long_edges.size() - 1;
}

Point Explorer::special_step(WalkTranscript& tr, StepRecord& rec, const Point& v, Stream& walk) {
  const Scales& sc = st_.scales();
  const std::int64_t t = sp_.t;
  LongEdgeEvent& ev = tr.long_edges[sp_.event];
  if (t >= 1) {
    if (!st_.visited(v) && !st_.full(v)) {
      st_.reveal_ball(v);
      st_.make_full(v, nullptr);
    }
    for (const Point& y : st_.long_neighbours(v)) {
      const bool same = (v == sp_.v && y == sp_.x) || (v == sp_.x && y == sp_.v);
      if (!same) {
        add_error(tr, rec, 4);
        break;
      }
    }
    if (sp_.synced) {
      const auto it = sp_.id.find(v);
      const bool match = t < static_cast<std::int64_t>(sp_.y.y.size()) && it != sp_.id.end() &&
                         it->second == sp_.y.y[static_cast<std::size_t>(t)];
      if (!match) {
        sp_.synced = false;
        if (t < sc.phase_length) {
          sp_.tau = t;
          ev.tau = t;
          add_error(tr, rec, 5);
        }
      }
    }
  }
  const std::vector<Point>& nb = options(v);
  Point next;
  const bool y_next = t + 1 < static_cast<std::int64_t>(sp_.y.y.size());
  if (sp_.synced && y_next) {
    const int u = sp_.id.at(v);
    std::vector<Point> star, other;
    for (int w : sp_.g.neighbours(u)) star.push_back(sp_.vstar_sites[static_cast<std::size_t>(w)]);
    for (const Point& w : nb) {
      if (std::find(star.begin(), star.end(), w) == star.end()) other.push_back(w);
    }
    const double follow = static_cast<double>(star.size()) / static_cast<double>(nb.size());
    if (other.empty() || walk.uniform() < follow) {
      next = sp_.vstar_sites[static_cast<std::size_t>(sp_.y.y[static_cast<std::size_t>(t + 1)])];
    } else {
      next = other[walk.below(other.size())];
    }
  } else {
    next = nb[walk.below(nb.size())];
  }
  if (t == sc.phase_length) {
    bool away = sp_.y.tau_star >= 0 && static_cast<double>(sp_.y.tau_star) < sc.phase_scale;
    for (std::int64_t s = std::max<std::int64_t>(sp_.y.tau_star, 0); away && s <= sc.phase_length; ++s) {
      if (s >= static_cast<std::int64_t>(sp_.y.y.size())) break;
      const int w = sp_.y.y[static_cast<std::size_t>(s)];
      if (w == sp_.g.v() || w == sp_.g.x()) away = false;
    }
    ev.K = sp_.tau == 0 && away;
    if (sp_.tau == 0) ev.tau = sc.phase_length;
    if (!ev.K) add_error(tr, rec, 6);
    sp_.active = false;
  }
  ++sp_.t;
  return next;
}

void Explorer::run_walk(std::uint64_t ell) {
  ell_ = ell;
  sp_ = Special{};
  const ExplorationConfig& cfg = st_.config();
  const Scales& sc = st_.scales();
  const TypeGrid& grid = st_.grid();
  Stream walk(cfg.seed, Role::walk, {ell});
  Stream mc(cfg.seed, Role::trial, {ell});

  WalkTranscript tr;
  tr.ell = ell;
  tr.phi.assign(static_cast<std::size_t>(grid.cells()), 0);
  tr.steps.reserve(static_cast<std::size_t>(n_));
  WalkPath path;
  path.d = st_.dimension();
  path.walk_index = ell;
  path.stream_key = walk.key();
  std::unordered_set<Point, PointHash> own;

  Point pos{};
  Point v = st_.site(pos);
  path.positions.push_back(pos);
  path.sites.push_back(v);
  path.is_new.push_back(1);
  path.jump.push_back(0);
  own.insert(v);

  for (std::int64_t i = 0; i < n_; ++i) {
    StepRecord rec;
    rec.pos = pos;
    rec.site = v;
    Point next;
    if (sp_.active && sp_.t >= 1) {
      rec.phase = 1;
      next = special_step(tr, rec, v, walk);
    } else if (st_.in_w_plus(v)) {
      if (!st_.full(v)) {
        st_.reveal_ball(v);
        st_.make_full(v, nullptr);
      }
      if (!st_.long_neighbours(v).empty()) add_error(tr, rec, 1);
      const std::vector<Point>& nb = options(v);
      next = nb[walk.below(nb.size())];
    } else {
      st_.reveal_ball(v);
      const VertexType tv = st_.local_type(v, mc);
      const int cell = grid.cell_of(tv);
      const std::int64_t iota = ++tr.phi[static_cast<std::size_t>(cell)];
      rec.cell = cell;
      rec.phi = iota;
      const auto [j, m] = grid.type_of_cell(cell);
      Stream w(cfg.seed, Role::coupling_w,
               {ell, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(iota)});
      const std::vector<Point> named = st_.make_full(v, &w);
      tr.new_vertices.push_back({i, cell, iota, tv, static_cast<int>(named.size())});
      bool special = false;
      if (named.size() >= 2) {
        add_error(tr, rec, 2);
      } else if (named.size() == 1) {
        const Point z = named.front();
        const Point x = st_.site(v + z);
        if (near_w_plus(x, v) || !st_.edge(v, x).value_or(false)) {
          add_error(tr, rec, 2);
        } else {
          st_.reveal_ball(x);
          const VertexType tx = st_.local_type(x, mc);
          st_.make_full(x, nullptr);
          st_.w_plus_.insert(x);
          if (st_.degree(v) != tv.m + 1 || st_.degree(x) != tx.m + 1) {
            add_error(tr, rec, 3);
          } else {
            rec.A = 1;
            special = true;
            start_special(tr, i, v, x, tv, tx, cell, iota, z);
          }
        }
      }
      if (special) {
        next = special_step(tr, rec, v, walk);
      } else {
        const std::vector<Point>& nb = options(v);
        next = nb[walk.below(nb.size())];
      }
    }
    visit(v);
    tr.steps.push_back(rec);

    const Point disp = st_.offset(v, next);
    pos += disp;
    v = next;
    path.positions.push_back(pos);
    path.sites.push_back(v);
    path.is_new.push_back(own.insert(v).second ? 1 : 0);
    path.jump.push_back(sup_norm(disp, path.d));
  }
  if (sp_.active) tr.long_edges[sp_.event].truncated = true;
  st_.transcripts.push_back(std::move(tr));
  st_.paths.push_back(std::move(path));
}

ExplorationResult run_exploration(const ExplorationConfig& config) {
  const ModelParams& params = config.backend == ExplorationBackend::materialized && config.env != nullptr
                                  ? config.env->params()
                                  : config.params;
  ExplorationResult res;
  res.scales = scale_parameters(config.k, params.s, params.d, config.gamma, config.rho, config.rho_floor);
  const std::int64_t horizon = std::int64_t{1} << config.k;
  if (res.scales.phase_length >= horizon) {
    throw std::invalid_argument("run_exploration: special phase 2^{gamma k + 1} does not fit in 2^k steps");
  }
  TypeGrid grid = config.grid;
  if (config.pilot > 0) res.pilot = sample_type_law(config, res.scales, config.pilot, derive_key(config.seed, Role::type_sample));
  if (grid.J() == 0) {
    if (res.pilot.empty()) throw std::invalid_argument("run_exploration: no grid and no pilot sample");
    std::vector<double> p;
    for (const VertexType& t : res.pilot) p.push_back(t.p);
    grid = quantile_grid(p, config.default_J);
  }
  res.state = ExplorationState(config, res.scales, grid);
  Explorer ex(res.state, config.steps.value_or(horizon));
  for (std::uint64_t ell = 1; ell <= config.walks; ++ell) ex.run_walk(ell);
  return res;
}

void write_transcript_jsonl(const ExplorationState& state, std::ostream& out) {
  const int d = state.dimension();
  for (const WalkTranscript& tr : state.transcripts) {
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      const StepRecord& r = tr.steps[i];
      nlohmann::json j;
      j["ell"] = tr.ell;
      j["i"] = i;
      nlohmann::json pos = nlohmann::json::array();
      for (int c = 0; c < d; ++c) pos.push_back(r.pos[c]);
      j["pos"] = pos;
      j["phase"] = r.phase;
      j["A"] = r.A;
      j["Bcode"] = r.B;
      if (r.cell >= 0) {
        const auto [jj, m] = state.grid().type_of_cell(r.cell);
        j["Njm"] = {jj, m};
        j["phi"] = r.phi;
      } else {
        j["Njm"] = nullptr;
        j["phi"] = nullptr;
      }
      out << j.dump() << '\n';
    }
  }
}

// ---- event scan ----

EventReport event_scan(const WalkPath& path, const NeighbourFn& neighbours, const OffsetFn& offset,
                       const Scales& scales, std::int64_t horizon) {
  const int d = path.d;
  const auto n = path.steps();
  if (horizon < 0) horizon = std::int64_t{1} << scales.k;
  EventReport rep;
  rep.steps = n;
  std::unordered_map<Point, std::vector<std::int64_t>, PointHash> times;
  for (std::int64_t t = 0; t <= n; ++t) times[path.sites[static_cast<std::size_t>(t)]].push_back(t);
  auto visits_in = [&](const Point& s, std::int64_t lo, std::int64_t hi) {
    const auto it = times.find(s);
    if (it == times.end() || lo > hi) return false;
    const auto p = std::lower_bound(it->second.begin(), it->second.end(), lo);
    return p != it->second.end() && *p <= hi;
  };
  const std::int64_t T = scales.phase_length;
  const auto g = static_cast<std::int64_t>(std::floor(scales.return_window));
  std::int64_t cA = 0, cB = 0, cC = 0, cD = 0, cE = 0, cF = 0, cG = 0;
  for (std::int64_t i = 0; i <= n; ++i) {
    const Point o = path.sites[static_cast<std::size_t>(i)];
    const std::vector<Point> nb = neighbours(o);
    std::vector<Point> longer, atleast;
    for (const Point& y : nb) {
      const Coord r = sup_norm(offset(o, y), d);
      if (r > scales.rho) longer.push_back(y);
      if (r >= scales.rho) atleast.push_back(y);
    }
    const bool A = !longer.empty();
    bool B = A;
    for (const Point& y : longer) {
      if (visits_in(y, i + 1, std::min(n, i + T))) B = false;
    }
    bool C = false;
    for (std::int64_t t = 0; t <= g && i + t <= n && !C; ++t) {
      const Point z = path.positions[static_cast<std::size_t>(i + t)] - path.positions[static_cast<std::size_t>(i)];
      C = static_cast<double>(sup_norm(z, d)) > scales.ball_scale;
    }
    bool D = false;
    for (const Point& y : longer) {
      const auto it = times.find(y);
      if (it == times.end()) continue;
      const auto p = std::upper_bound(it->second.begin(), it->second.end(), i);
      if (p == it->second.end() || *p > i + horizon) continue;
      if (path.sites[static_cast<std::size_t>(*p - 1)] != o) D = true;
    }
    bool E = false;
    for (const Point& y : atleast) {
      auto check = [&](const Point& from) {
        for (const Point& x : neighbours(from)) {
          const double a = static_cast<double>(sup_norm(offset(y, x), d));
          const double b = static_cast<double>(sup_norm(offset(o, x), d));
          if (std::min(a, b) >= scales.ball_scale) return true;
        }
        return false;
      };
      if (check(y) || check(o)) E = true;
    }
    bool F = false;
    for (const Point& y : atleast) {
      if (visits_in(o, i + T, std::min(n, i + horizon)) || visits_in(y, i + T, std::min(n, i + horizon))) F = true;
    }
    const bool G = A && B && C;
    cA += A, cB += B, cC += C, cD += D, cE += E, cF += F, cG += G;
    rep.G_union |= G;
    rep.D_union |= D;
    rep.E_union |= E;
    rep.F_union |= F;
  }
  const auto total = static_cast<double>(n + 1);
  rep.A = cA / total;
  rep.B = cB / total;
  rep.C = cC / total;
  rep.D = cD / total;
  rep.E = cE / total;
  rep.F = cF / total;
  rep.G = cG / total;
  return rep;
}

EventReport event_scan(const WalkPath& path, const Environment& env, const Scales& scales) {
  auto nb = [&](const Point& s) {
    std::vector<Point> out;
    const VertexId v = env.id(s);
    for (std::int64_t k = 0; k < env.degree(v); ++k) out.push_back(env.point(env.neighbor(v, k)));
    return out;
  };
  const bool torus = env.params().boundary == Boundary::torus;
  auto disp = [&, torus](const Point& a, const Point& b) { return torus ? env.torus().displacement(a, b) : b - a; };
  return event_scan(path, nb, disp, scales);
}

EventReport event_scan(const ExplorationState& state, std::size_t walk) {
  auto nb = [&](const Point& s) { return state.neighbours(s); };
  auto off = [&](const Point& a, const Point& b) { return state.offset(a, b); };
  EventReport rep = event_scan(state.paths.at(walk), nb, off, state.scales());
  rep.coupling_success = state.transcripts.at(walk).error_free();
  return rep;
}

bool long_edge_coincidence(const WalkPath& a, const WalkPath& b, const NeighbourFn& neighbours,
                           const OffsetFn& offset, int d, Coord rho) {
  auto edges_of = [&](const WalkPath& p) {
    std::set<std::pair<Point, Point>> out;
    std::unordered_set<Point, PointHash> seen;
    for (const Point& s : p.sites) {
      if (!seen.insert(s).second) continue;
      for (const Point& y : neighbours(s)) {
        if (sup_norm(offset(s, y), d) >= rho) out.insert(s < y ? std::pair{s, y} : std::pair{y, s});
      }
    }
    return out;
  };
  const auto ea = edges_of(a);
  if (ea.empty()) return false;
  for (const auto& e : edges_of(b)) {
    if (ea.count(e)) return true;
  }
  return false;
}

}  // namespace lrp
