#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lrp/local_chain.hpp"
#include "lrp/rng.hpp"

namespace lrp {

class DegenerateParameterError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// (1 - p) d / (1 + (1 - p) d). Throws DegenerateParameterError when p = 1 or d = 0.
double excursion_parameter(double p_tilde, int d_tilde);

// Same value, but 0 for the degenerate corner: no escape is ever possible.
double excursion_parameter_or_zero(double p_tilde, int d_tilde);

inline constexpr std::int64_t kInfiniteCount = std::numeric_limits<std::int64_t>::max();

// R(t) = min{i >= 0 : U_i < t} over a fixed lazily drawn uniform sequence.
class GeomStream {
 public:
  GeomStream() = default;
  explicit GeomStream(Stream s) : stream_(s) {}
  GeomStream(std::uint64_t master, Role role, std::initializer_list<std::uint64_t> ids) : stream_(master, role, ids) {}

  // t in (0, 1]; values at or above `limit` are reported as `limit`.
  std::int64_t value(double t, std::int64_t limit = kInfiniteCount);
  double u(std::size_t i);

 private:
  Stream stream_;
  std::vector<double> cache_;
};

// P(Geom(a) > Geom(b)) for independent geometrics on {0, 1, ...}.
double geometric_exceeds(double a, double b);

// Two balls joined by a single edge between their roots.
struct VStar {
  BallGraph a, b;
  int na = 0;
  int size() const { return na + b.size(); }
  int v() const { return 0; }
  int x() const { return na; }
  bool x_side(int u) const { return u >= na; }
  // Neighbours in V*; exits are not vertices.
  std::vector<int> neighbours(int u) const;
  int exits(int u) const { return u < na ? a.exits[u] : b.exits[u - na]; }
};

VStar join_balls(BallGraph a, BallGraph b);

enum class Excursion { cross = 1, back = 2, escape = 3 };

struct ExcursionPath {
  Excursion type = Excursion::back;
  std::vector<int> vertices;  // V* ids after leaving the root, root excluded unless it is the return
  bool absorbed = false;
};

// One excursion from a root of V*, conditioned on its type by rejection.
// `cap` is the return window in steps; nullopt means unbounded (absorbing balls only).
ExcursionPath sample_excursion(const VStar& g, int root, Excursion type, std::optional<std::int64_t> cap,
                               Stream& stream, std::int64_t max_attempts = 10000000);

// Local (p-tilde, d-tilde) for each side of V* by exact solve.
struct SideTypes {
  double p_v = 0.0, p_x = 0.0;
  int d_v = 0, d_x = 0;
};
SideTypes side_types(const VStar& g, std::optional<std::int64_t> cap);

// V* walk started at v, coupled to prescribed excursion counts R_v and R_x:
// v makes R_v crossings before its first escape, x makes R_x.
struct CoupledVStarWalk {
  std::vector<int> y;  // Y_0 = v, Y_1, ...
  std::int64_t tau_star = -1;  // end of the first escape excursion, -1 if not reached
  bool x_side_at_tau_star = false;
  bool absorbed = false;
  std::int64_t crossings = 0;  // (v,x) crossings before tau_star
};

CoupledVStarWalk coupled_vstar_walk(const VStar& g, std::int64_t R_v, std::int64_t R_x, std::int64_t cap,
                                    std::int64_t length, Stream& stream);

struct VStarReport {
  SideTypes types;
  double param_v = 0.0, param_x = 0.0;
  std::vector<std::int64_t> r_v, r_x;  // direct excursion-sequence samples
  double ks_v = 0.0, ks_x = 0.0;
  std::int64_t trials = 0;
  std::int64_t well_defined = 0;
  std::int64_t side_agree = 0;
  std::int64_t parity_agree = 0;
};

// Simulates the plain V* walk from v. R_v and R_x are read off the excursion
// sequences at each root; the side at tau* is compared with R_v > R_x.
VStarReport simulate_vstar(const BallGraph& a, const BallGraph& b, std::optional<std::int64_t> cap,
                           std::int64_t trials, Stream& stream);

}  // namespace lrp
