#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lrp/environment.hpp"
#include "lrp/estimators.hpp"
#include "lrp/excursion.hpp"
#include "lrp/types.hpp"
#include "lrp/walk.hpp"

namespace lrp {

struct Scales {
  int k = 0;
  double alpha = 0.0;
  double rho_formula = 0.0;  // k^{-200/(1-alpha)} 2^{k/alpha}, may underflow to 0
  Coord rho = 2;             // long-edge threshold actually used
  bool rho_clamped = false;
  bool rho_overridden = false;
  double delta = 0.0;
  double gamma = 0.0;
  double ball_scale = 1.0;         // 2^{delta k}
  Coord ball_radius = 1;           // floor(2^{delta k}), sup norm
  double return_window = 1.0;      // 2^{gamma k}
  std::int64_t return_cap = 1;     // largest integer step count below 2^{gamma k}, at least 1
  double phase_scale = 2.0;        // 2^{gamma k + 1}
  std::int64_t phase_length = 2;   // floor(2^{gamma k + 1})
  bool small_ball = false;         // ball radius below 2: delta k too small
  bool overlapping_balls = false;  // rho < 2 * ball radius: the two sides of V* can touch
};

// s must lie in (d, d+1). rho is clamped to at least `rho_floor` unless overridden.
Scales scale_parameters(int k, double s, int d, std::optional<double> gamma = std::nullopt,
                        std::optional<Coord> rho_override = std::nullopt, Coord rho_floor = 2);

enum class ExplorationBackend { lazy_zd, keyed_torus, materialized };
// coupled: long edges of new vertices come from the w fields; oracle: from the backend itself.
enum class LongEdgeSource { coupled, oracle };

struct ExplorationConfig {
  ModelParams params;
  std::uint64_t seed = 0;
  int k = 10;
  std::uint64_t walks = 8;
  std::optional<double> gamma;
  std::optional<Coord> rho;
  Coord rho_floor = 2;
  ExplorationBackend backend = ExplorationBackend::lazy_zd;
  LongEdgeSource source = LongEdgeSource::coupled;
  const Environment* env = nullptr;  // materialized backend
  TypeGrid grid;                     // empty: quantile grid of a pilot sample
  int default_J = 8;
  std::size_t pilot = 2000;
  Coord r_max = Coord{1} << 40;      // lazy backend reach of the w fields
  ReturnMode mode = ReturnMode::automatic;
  std::int64_t mc_trials = 2000;
  std::optional<std::int64_t> steps;  // defaults to 2^k
};

// One step X_i -> X_{i+1} of walk ell.
struct StepRecord {
  Point pos;   // unwrapped X_i
  Point site;  // vertex identity of X_i
  std::uint8_t phase = 0;  // A*: 1 inside a special phase
  std::uint8_t A = 0;
  std::uint8_t B = 0;
  int cell = -1;           // type cell of a new vertex (N = 1), else -1
  std::int64_t phi = 0;    // iota: count of new vertices of that cell including this one
};

struct NewVertexRecord {
  std::int64_t step = 0;
  int cell = 0;
  std::int64_t iota = 0;
  VertexType type;
  int w_opens = 0;  // opens of the w field (or oracle long edges) beyond rho
};

struct LongEdgeEvent {
  std::int64_t step = 0;
  Point v, x;          // sites
  Point offset;        // unwrapped x - v
  VertexType type_v, type_x;
  int cell = 0;
  std::int64_t iota = 0;
  std::int64_t R_v = 0, R_x = 0;
  bool x_side = false;  // R_v > R_x
  std::int64_t tau = 0;
  std::int64_t tau_star = -1;
  bool K = false;
  bool truncated = false;  // phase cut by the end of the walk
};

struct WalkTranscript {
  std::uint64_t ell = 0;
  std::vector<StepRecord> steps;
  std::vector<NewVertexRecord> new_vertices;
  std::vector<LongEdgeEvent> long_edges;
  std::vector<std::int64_t> phi;        // final phi per cell
  std::array<std::int64_t, 7> errors{};  // count per B code, index 0 unused
  bool error_free() const {
    for (std::size_t c = 1; c < errors.size(); ++c) {
      if (errors[c] != 0) return false;
    }
    return true;
  }
};

// Revealed environment plus the coupling bookkeeping of all walks so far.
class ExplorationState {
 public:
  ExplorationState() = default;
  ExplorationState(const ExplorationConfig& config, const Scales& scales, TypeGrid grid);

  const ExplorationConfig& config() const { return config_; }
  const Scales& scales() const { return scales_; }
  const TypeGrid& grid() const { return grid_; }
  int dimension() const { return config_.params.d; }

  Point site(const Point& p) const;  // vertex identity of an unwrapped point
  Point offset(const Point& from, const Point& to) const;  // displacement between sites
  Coord distance(const Point& a, const Point& b) const { return sup_norm(offset(a, b), dimension()); }

  // nullopt when the pair is still unrevealed.
  std::optional<bool> edge(const Point& a, const Point& b) const;
  bool revealed(const Point& a, const Point& b) const { return edge(a, b).has_value(); }
  bool full(const Point& u) const { return full_.count(u) != 0; }
  // Neighbour sites sorted by displacement; complete only for full vertices.
  std::vector<Point> neighbours(const Point& u) const;
  std::int64_t degree(const Point& u) const { return static_cast<std::int64_t>(neighbours(u).size()); }
  std::vector<Point> long_neighbours(const Point& u) const;  // beyond rho

  bool visited(const Point& u) const { return visited_.count(u) != 0; }
  bool in_w_plus(const Point& u) const { return w_plus_.count(u) != 0; }
  std::size_t registry_size() const { return registry_.size(); }
  std::size_t full_count() const { return full_.size(); }

  // Reveal every pair inside the ball around u, then its remaining edges.
  void reveal_ball(const Point& u);
  // Returns the long (beyond rho) offsets named by the source: w-field opens in
  // coupled mode, the backend's long neighbours in oracle mode.
  std::vector<Point> make_full(const Point& u, Stream* long_stream);
  VertexType local_type(const Point& u, Stream& mc) const;
  BallGraph ball_graph(const Point& u) const;  // induced on the revealed ball

  std::vector<WalkTranscript> transcripts;
  std::vector<WalkPath> paths;

 private:
  friend class Explorer;
  struct PairHash {
    std::size_t operator()(const std::pair<Point, Point>& p) const noexcept {
      return PointHash{}(p.first) * 31 + PointHash{}(p.second);
    }
  };
  std::pair<Point, Point> key(const Point& a, const Point& b) const { return a < b ? std::pair{a, b} : std::pair{b, a}; }
  bool forced(const Point& a, const Point& b) const;
  bool backend_edge(const Point& a, const Point& b) const;
  void set_edge(const Point& a, const Point& b, bool open);

  ExplorationConfig config_;
  Scales scales_;
  TypeGrid grid_;
  std::unordered_map<std::pair<Point, Point>, bool, PairHash> registry_;
  std::unordered_map<Point, std::vector<Point>, PointHash> open_;  // revealed non-forced open pairs
  std::unordered_set<Point, PointHash> full_;
  std::unordered_set<Point, PointHash> visited_;
  std::unordered_set<Point, PointHash> w_plus_;
};

// WalkView over the revealed graph (sites as vertices).
struct RevealedView {
  using vertex_type = Point;
  const ExplorationState* state;
  std::int64_t degree(const Point& u) const { return state->degree(u); }
  std::pair<Point, Point> step(const Point& u, std::int64_t k) const {
    const Point w = state->neighbours(u)[static_cast<std::size_t>(k)];
    return {w, state->offset(u, w)};
  }
  Point site(const Point& u) const { return u; }
  int dimension() const { return state->dimension(); }
};

// Local types at `count` vertices away from the walks (the pilot law of (p-tilde, d-tilde)).
std::vector<VertexType> sample_type_law(const ExplorationConfig& config, const Scales& scales, std::size_t count,
                                        std::uint64_t seed);

struct ExplorationResult {
  Scales scales;
  ExplorationState state;
  std::vector<VertexType> pilot;
};

ExplorationResult run_exploration(const ExplorationConfig& config);

// One JSON object per step: {ell, i, pos, phase, A, Bcode, Njm, phi}.
void write_transcript_jsonl(const ExplorationState& state, std::ostream& out);

// ---- event scan ----

struct EventReport {
  std::int64_t steps = 0;
  // Fraction of start times i at which the translated event holds.
  double A = 0, B = 0, C = 0, D = 0, E = 0, F = 0, G = 0;
  // Unions over start times.
  bool G_union = false, D_union = false, E_union = false, F_union = false;
  std::optional<bool> coupling_success;  // sum of B codes is 0, transcripts only
};

// Neighbour sites of a site; must be complete for visited sites and long-edge endpoints.
using NeighbourFn = std::function<std::vector<Point>(const Point&)>;
using OffsetFn = std::function<Point(const Point&, const Point&)>;

EventReport event_scan(const WalkPath& path, const NeighbourFn& neighbours, const OffsetFn& offset,
                       const Scales& scales, std::int64_t horizon = -1);
EventReport event_scan(const WalkPath& path, const Environment& env, const Scales& scales);
EventReport event_scan(const ExplorationState& state, std::size_t walk);

// Whether two walks touch a common long edge (length at least rho) at either endpoint.
bool long_edge_coincidence(const WalkPath& a, const WalkPath& b, const NeighbourFn& neighbours,
                           const OffsetFn& offset, int d, Coord rho);

}  // namespace lrp
