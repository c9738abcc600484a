#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "lrp/analysis.hpp"
#include "lrp/environment.hpp"
#include "lrp/local_chain.hpp"
#include "lrp/stats.hpp"
#include "lrp/types.hpp"
#include "lrp/walk.hpp"

namespace lrp {

// ---- tail index ----

struct TailEstimate {
  double alpha_hat = 0.0;
  double fraction = 0.0;
  double ci_half_width = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;  // order statistics used
};

// Hill estimator on the top `top_fraction` order statistics, percentile bootstrap CI.
TailEstimate hill_tail_index(std::span<const double> samples, double top_fraction = 0.01,
                             std::size_t bootstrap = 200, std::uint64_t seed = 0);
std::vector<TailEstimate> hill_sensitivity(std::span<const double> samples, const std::vector<double>& fractions,
                                           std::size_t bootstrap = 200, std::uint64_t seed = 0);

// ---- scaling exponent ----

enum class ScalingStatistic { median, rms };

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  Interval ci;
  std::vector<double> n;
  std::vector<double> statistic;
  bool short_span = false;  // fewer than 4 octaves
};

// values(w, g) = |X_{n_g}| of walk w. Bootstrap resamples walks.
ScalingFit scaling_exponent(const std::vector<double>& n_grid, const Eigen::MatrixXd& values, ScalingStatistic stat,
                            std::size_t bootstrap = 200, std::uint64_t seed = 0);

// factory(n, w) -> |X_n| of the w-th walk.
template <class F>
ScalingFit scaling_exponent(F&& factory, const std::vector<double>& n_grid, std::size_t walks_per_n,
                            ScalingStatistic stat, std::size_t bootstrap = 200, std::uint64_t seed = 0) {
  Eigen::MatrixXd values(static_cast<Eigen::Index>(walks_per_n), static_cast<Eigen::Index>(n_grid.size()));
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    for (std::size_t w = 0; w < walks_per_n; ++w) {
      values(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(g)) =
          factory(static_cast<std::int64_t>(n_grid[g]), w);
    }
  }
  return scaling_exponent(n_grid, values, stat, bootstrap, seed);
}

// ---- local return probabilities ----

enum class ReturnMode { exact, monte_carlo, automatic };

struct LocalReturn {
  double p = 1.0;
  int d_tilde = 0;
  Interval ci;              // degenerate [p, p] in exact mode
  bool exact = true;
  bool no_local_neighbours = false;
  int ball_size = 1;
};

inline constexpr int kExactBallLimit = 2000;

LocalReturn local_return(const BallGraph& g, std::optional<std::int64_t> cap, ReturnMode mode,
                         std::int64_t trials, Stream& stream);

template <WalkView V>
LocalReturn return_probabilities(const V& view, const typename V::vertex_type& v, Coord ball_radius,
                                 std::optional<std::int64_t> time_cap, ReturnMode mode, BallRule rule,
                                 std::int64_t trials, Stream& stream) {
  return local_return(build_ball(view, v, ball_radius, rule), time_cap, mode, trials, stream);
}

// ---- new-vertex rates ----

struct RateReport {
  std::int64_t t = 0;
  bool annealed = false;
  std::vector<std::int64_t> n_t;                 // per walk
  std::vector<std::vector<std::int64_t>> cells;  // per walk, per type cell (cell 0 = overflow)
  double c_star = 0.0;
  std::vector<double> c_cell;                    // per cell, cell 0 = overflow rate
  double c_bar = 0.0;                            // overflow rate: C* minus the typed cells
  double max_relative_deviation = 0.0;           // max_l |N_t^l / t - C*| / C*
  std::vector<double> h_sup;                     // per walk sup_t sup_sets |N - t C| / t_max
  std::vector<std::uint8_t> h_pass;
  double fraction_passing = 0.0;
  std::vector<std::int64_t> horizons;            // dyadic sub-horizons for the monotonicity monitor
  std::vector<double> fraction_passing_by_horizon;
  std::vector<double> plateau;                   // ensemble mean N_t/t at the horizons
};

// type_of(site) gives the local type of a vertex; called once per distinct site.
RateReport new_vertex_rates(const std::vector<WalkPath>& paths,
                            const std::function<VertexType(const Point&)>& type_of, const TypeGrid& grid,
                            double chi, bool annealed = false);

// ---- heat kernel ----

struct HeatKernelReport {
  std::vector<std::int64_t> t;
  std::vector<double> p;  // P_t(0,0), parity-smoothed on non-bipartite graphs
  double slope = 0.0;
  Interval ci;
  bool bipartite = false;
  bool exact = true;
  double boundary_mass = 0.0;  // mass at max t on vertices that lost an edge to the window
  std::int64_t window_vertices = 0;
};

// Iterates the kernel over the window (sup radius from origin; 0 = whole graph)
// with edges leaving the window dropped. Bipartite graphs use even t only;
// otherwise P_t is replaced by (P_t + P_{t+1}) / 2.
HeatKernelReport heat_kernel_exact(const Environment& env, VertexId origin, const std::vector<std::int64_t>& t_grid,
                                   Coord window_radius = 0);

class ZeroReturnsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HeatKernelReport heat_kernel_mc(const Environment& env, VertexId origin, const std::vector<std::int64_t>& t_grid,
                                std::int64_t trials, std::uint64_t seed);

std::vector<std::int64_t> dyadic_grid(int lo_exp, int hi_exp);

// ---- small jumps ----

// n^{-1/alpha} sum_{i <= n} |X_i - X_{i-1}| 1{|X_i - X_{i-1}| <= rho} on the first n steps.
double small_jump_mass(const WalkPath& path, Coord rho, double alpha, std::int64_t n = -1);

struct SmallJumpTrend {
  std::vector<std::int64_t> n;
  std::vector<double> median;
  bool strictly_decreasing = false;
  double ratio = 0.0;  // last / first
};

SmallJumpTrend small_jump_trend(const std::vector<WalkPath>& paths, Coord rho, double alpha,
                                const std::vector<std::int64_t>& n_grid);

// ---- jump-sum tail envelope ----

struct ZmaxReport {
  double alpha = 0.0;
  double c = 0.0;           // max of S(y) y^alpha over the fit window
  double fit_lo = 1.0, fit_hi = 10.0;
  double check_hi = 10.0;   // largest y still carrying min_exceedances samples
  std::vector<double> y;
  std::vector<double> survival;
  std::vector<double> envelope;
  int violations = 0;       // S(y) above c y^-alpha by more than 3 binomial SE
  bool degenerate = false;  // survival hits 0 inside the fit window
  std::size_t n = 0;
};

ZmaxReport zmax_tail_check(std::span<const double> samples, double alpha, double fit_lo = 1.0, double fit_hi = 10.0,
                           std::size_t min_exceedances = 10, int grid_points = 200);

// n^{-1/alpha} sum_{i <= n} sum_{|x| > rho} |x| w_i(x) with independent Bernoulli(p(|x|)) fields w_i.
std::vector<double> normalized_jump_sums(const ModelParams& params, Coord rho, std::int64_t n, std::size_t count,
                                         std::uint64_t seed, double alpha, Coord r_max = Coord{1} << 40);

// ---- cutpoint chain ----

class ModelViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CutpointChain {
  std::vector<Coord> cutpoints;
  std::vector<Coord> gaps;           // c_{j+1} - c_j
  std::vector<double> q_forward;     // Q(j, j+1), solved from c_j
  std::vector<double> q_backward;    // Q(j+1, j), solved from c_{j+1}
  std::vector<double> q_stay;        // Q(j, j) for interior cutpoints j
  std::vector<double> p;             // p_0 = 0, p_j - p_{j-1} = 1 / Q(j-1, j)
  double mean_gap = 0.0;
  double mean_p_spacing = 0.0;
  double k_star = 0.0;               // 2 (E gap)^2 / E[p_1 - p_0]
  double quadratic_variation = 0.0;  // mean of 1/Q(j,j+1) + 1/Q(j,j-1)
  double max_symmetry_error = 0.0;
  bool resistance_bound = true;      // 1/Q(j,j+1) <= 2 gap for every gap
  std::int64_t bound_violations = 0;
  double cutpoint_time_fraction = 0.0;  // sum of cutpoint degrees / sum of degrees
  bool cyclic = false;
};

CutpointChain cutpoint_chain(const Environment& env);

// Var(X_n) vs n least-squares slope over walks from uniform starts.
struct DiffusivityFit {
  double sigma2 = 0.0;
  std::vector<double> n;
  std::vector<double> variance;
  std::size_t walks = 0;
};
DiffusivityFit variance_diffusivity(const Environment& env, const std::vector<std::int64_t>& n_grid,
                                    std::size_t walks, std::uint64_t seed);

// ---- marginal comparison ----

struct MarginalComparison {
  std::vector<double> t;
  std::vector<double> ks;
  std::vector<double> ks_critical;  // 5% two-sample critical value
  double lq_quantile = 0.0;         // L^q distance between quantile-coupled paths
};

// Column c of each matrix holds the marginal sample at t_list[c].
MarginalComparison marginal_compare(const Eigen::MatrixXd& sim, const Eigen::MatrixXd& reference,
                                    const std::vector<double>& t_list, double q);

// Rescaled first coordinate n^{-a} X_{floor(n t)} of each path at each t.
Eigen::MatrixXd marginals_at(const std::vector<WalkPath>& paths, double a, const std::vector<double>& t_list);

}  // namespace lrp
