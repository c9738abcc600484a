#include "lrp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "lrp/coupling.hpp"
#include "lrp/estimators.hpp"
#include "lrp/excursion.hpp"
#include "lrp/exploration.hpp"
#include "lrp/fixtures.hpp"
#include "lrp/lattice_law.hpp"
#include "lrp/snapshot.hpp"
#include "lrp/stable.hpp"
#include "lrp/stats.hpp"

namespace lrp {

Verdict check_range(std::string name, double value, std::optional<double> lo, std::optional<double> hi,
                    std::string detail) {
  Verdict v{std::move(name), value, lo, hi, true, true, std::move(detail)};
  v.pass = std::isfinite(value) && (!lo || value >= *lo) && (!hi || value <= *hi);
  return v;
}

Verdict report(std::string name, double value, std::string detail) {
  return Verdict{std::move(name), value, std::nullopt, std::nullopt, true, false, std::move(detail)};
}

bool ResultRecord::all_pass() const {
  if (status != "ok") return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return !v.check || v.pass; });
}

nlohmann::json to_json(const ResultRecord& r) {
  nlohmann::json j;
  j["pipeline"] = r.pipeline;
  j["config_hash"] = r.config_hash;
  j["input_hash"] = r.input_hash;
  j["config"] = r.canonical_config;
  j["status"] = r.status;
  j["error"] = r.error;
  j["all_pass"] = r.all_pass();
  j["seconds"] = r.seconds;
  j["artifacts"] = r.artifacts;
  j["metrics"] = r.metrics;
  nlohmann::json vs = nlohmann::json::array();
  for (const Verdict& v : r.verdicts) {
    nlohmann::json x;
    x["name"] = v.name;
    x["value"] = v.value;
    x["lo"] = v.lo ? nlohmann::json(*v.lo) : nlohmann::json(nullptr);
    x["hi"] = v.hi ? nlohmann::json(*v.hi) : nlohmann::json(nullptr);
    x["pass"] = v.pass;
    x["check"] = v.check;
    x["detail"] = v.detail;
    vs.push_back(x);
  }
  j["verdicts"] = vs;
  return j;
}

std::string ResultRecord::content_hash() const {
  nlohmann::json j = to_json(*this);
  j.erase("seconds");
  return sha1_hex(j.dump());
}

namespace {

struct Output {
  std::vector<Verdict>& verdicts;
  nlohmann::json& metrics;
  std::vector<std::string>& artifacts;
  const RunOptions& options;
  const ExperimentConfig& config;

  void log(const std::string& line) const {
    if (options.log != nullptr) *options.log << line << '\n';
  }
  std::string artifact_path(const std::string& name) const {
    std::filesystem::create_directories(config.out);
    const std::string p = (std::filesystem::path(config.out) / name).string();
    artifacts.push_back(p);
    return p;
  }
};

std::vector<double> pow2(const std::vector<int>& exps) {
  std::vector<double> out;
  for (int e : exps) out.push_back(std::ldexp(1.0, e));
  return out;
}

// ---- stable and brownian ----

void scaling_pipeline(const ExperimentConfig& c, Output& o, bool brownian) {
  const ModelParams& p = c.params;
  const double alpha = std::min(p.s - p.d, 2.0);
  const std::vector<double> n_grid = pow2(c.n_exp);
  const auto n_max = static_cast<std::int64_t>(n_grid.back());
  const Environment env = generate_environment(p, c.seed);
  o.log("environment generated: " + std::to_string(env.stored_edge_count()) + " stored edges");

  Eigen::MatrixXd values(c.walks, static_cast<Eigen::Index>(n_grid.size()));
  Eigen::MatrixXd first(c.walks, static_cast<Eigen::Index>(n_grid.size()));
  std::vector<double> jumps;
  for (std::int64_t w = 0; w < c.walks; ++w) {
    const WalkPath path = run_walk(env, 0, n_max, Stream(c.seed, Role::walk, {static_cast<std::uint64_t>(w) + 1}));
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      const Point& x = path.positions[static_cast<std::size_t>(n_grid[g])];
      values(w, static_cast<Eigen::Index>(g)) = static_cast<double>(sup_norm(x, p.d));
      first(w, static_cast<Eigen::Index>(g)) = static_cast<double>(x[0]);
    }
    if (!brownian) {
      for (std::size_t i = 1; i < path.jump.size(); ++i) jumps.push_back(static_cast<double>(path.jump[i]));
    }
  }
  const ScalingFit fit = scaling_exponent(n_grid, values, ScalingStatistic::median, 200, c.seed);
  const double target = brownian ? 0.5 : 1.0 / alpha;
  const double tol = c.slope_tolerance();
  o.verdicts.push_back(check_range("scaling_slope", fit.slope, target - tol, target + tol,
                                   "median |X_n| log-log slope, target " + format_double(target)));
  o.metrics["scaling"] = {{"n", fit.n},
                          {"median", fit.statistic},
                          {"slope", fit.slope},
                          {"ci", {fit.ci.lo, fit.ci.hi}},
                          {"short_span", fit.short_span}};
  if (brownian) {
    const Eigen::Index G = first.cols();
    const Eigen::Index top = std::min<Eigen::Index>(3, G);
    std::vector<double> ratio;
    for (Eigen::Index g = G - top; g < G; ++g) {
      const Eigen::VectorXd col = first.col(g);
      const double m = col.mean();
      const double var = (col.array() - m).square().sum() / static_cast<double>(col.size() - 1);
      ratio.push_back(var / n_grid[static_cast<std::size_t>(g)]);
    }
    const auto [mn, mx] = std::minmax_element(ratio.begin(), ratio.end());
    const double spread = *mx / *mn - 1.0;
    o.verdicts.push_back(check_range("variance_ratio_spread", spread, std::nullopt, c.tol_variance,
                                     "max/min - 1 of Var(X_n)/n over the top octaves"));
    o.metrics["variance_over_n"] = ratio;
  } else {
    std::vector<double> big;
    for (double j : jumps) {
      if (j > 1.0) big.push_back(j);
    }
    if (big.size() >= 1000) {
      const TailEstimate t = hill_tail_index(big, 0.01, 100, c.seed);
      o.verdicts.push_back(report("jump_tail_index", t.alpha_hat, "Hill on non-unit jump lengths, expect " + format_double(p.s - p.d)));
      o.metrics["hill"] = {{"alpha_hat", t.alpha_hat}, {"ci_half_width", t.ci_half_width}, {"k", t.k}, {"n", t.n}};
    }
  }

  if (!c.small_jump_exp.empty()) {
    std::vector<double> sj_n = pow2(c.small_jump_exp);
    const auto sj_max = static_cast<std::int64_t>(sj_n.back());
    std::vector<std::vector<double>> mass(sj_n.size());
    for (std::int64_t w = 0; w < c.small_jump_walks; ++w) {
      const WalkPath path =
          run_walk(env, 0, sj_max, Stream(c.seed, Role::walk, {static_cast<std::uint64_t>(w) + 1, 2}));
      for (std::size_t g = 0; g < sj_n.size(); ++g) {
        mass[g].push_back(small_jump_mass(path, c.small_jump_rho, alpha, static_cast<std::int64_t>(sj_n[g])));
      }
    }
    std::vector<double> med;
    for (auto& m : mass) med.push_back(median(m));
    int increases = 0;
    for (std::size_t g = 1; g < med.size(); ++g) increases += med[g] >= med[g - 1];
    o.verdicts.push_back(check_range("small_jump_nonincreasing_steps", increases, std::nullopt, 0.0,
                                     "octaves where the median small-jump mass failed to decrease"));
    o.verdicts.push_back(check_range("small_jump_ratio", med.back() / med.front(), std::nullopt, c.tol_ratio,
                                     "final / initial median"));
    o.metrics["small_jump"] = {{"n", sj_n}, {"median", med}, {"rho", c.small_jump_rho}};
  }

  if (c.zmax_samples > 0) {
    const std::vector<double> z = normalized_jump_sums(p, c.small_jump_rho, std::int64_t{1} << c.zmax_exp,
                                                       static_cast<std::size_t>(c.zmax_samples), c.seed, alpha);
    const ZmaxReport good = zmax_tail_check(z, p.s - p.d);
    const ZmaxReport wrong = zmax_tail_check(z, 2.0 * (p.s - p.d));
    o.verdicts.push_back(check_range("zmax_violations", good.violations, std::nullopt, 0.0,
                                     "survival above c y^-alpha, fitted on [1, 10]"));
    o.verdicts.push_back(check_range("zmax_wrong_exponent_violations", wrong.violations, 1.0, std::nullopt,
                                     "same check with exponent 2 alpha must fail"));
    o.metrics["zmax"] = {{"c", good.c}, {"check_hi", good.check_hi}, {"wrong_c", wrong.c}, {"n", good.n}};
  }

  if (c.ref_paths > 0) {
    if (p.d != 1) throw UnsupportedError("reference consistency check is implemented for d = 1");
    const LatticeJumpLaw law(p, Coord{1} << 40);
    Stream s(c.seed, Role::reference);
    const double norm = std::pow(static_cast<double>(c.ref_n), 1.0 / alpha);
    std::vector<double> ends;
    ends.reserve(static_cast<std::size_t>(c.ref_paths));
    for (std::int64_t i = 0; i < c.ref_paths; ++i) {
      ends.push_back(static_cast<double>(discrete_reference_endpoint(law, c.ref_n, s)[0]) / norm);
    }
    const CalibrationReport cal = calibrate_scale(ends, alpha, c.seed);
    Stream cms(c.seed, Role::calibration, {1});
    const std::vector<double> ref = sample_stable_1d(alpha, 1000000, cms, cal.scale);
    const double ks = ks_two_sample(ends, ref);
    o.verdicts.push_back(check_range("reference_ks", ks, std::nullopt, c.tol_ref_ks,
                                     "rescaled discrete reference endpoint vs calibrated stable law"));
    o.metrics["reference"] = {{"alpha", cal.alpha}, {"scale", cal.scale}, {"method", cal.method}, {"ks", ks}};
  }
}

// ---- heat kernel ----

void heatkernel_pipeline(const ExperimentConfig& c, Output& o) {
  const ModelParams& p = c.params;
  const Environment env = generate_environment(p, c.seed);
  const HeatKernelReport hk = heat_kernel_exact(env, 0, dyadic_grid(c.t_lo_exp, c.t_hi_exp), c.window);
  const double alpha = std::min(p.s - p.d, 2.0);
  const double target = -p.d / alpha;
  const double tol = c.slope_tolerance();
  o.verdicts.push_back(check_range("heat_kernel_slope", hk.slope, target - tol, target + tol,
                                   "log-log slope of P_t(0,0), target " + format_double(target)));
  o.metrics["heat_kernel"] = {{"t", hk.t},
                              {"p", hk.p},
                              {"slope", hk.slope},
                              {"bipartite", hk.bipartite},
                              {"boundary_mass", hk.boundary_mass},
                              {"window_vertices", hk.window_vertices}};
}

// ---- cutpoints ----

void cutpoints_pipeline(const ExperimentConfig& c, Output& o) {
  std::vector<std::int64_t> n_grid;
  for (int e : c.n_exp) n_grid.push_back(std::int64_t{1} << e);
  double worst_sym = 0.0;
  std::int64_t violations = 0, cutpoints = 0;
  std::vector<double> predicted, measured;
  for (std::int64_t e = 0; e < c.environments; ++e) {
    const std::uint64_t seed = derive_key(c.seed, Role::environment_seed, {static_cast<std::uint64_t>(e)});
    const Environment env = generate_environment(c.params, seed);
    const CutpointChain ch = cutpoint_chain(env);
    worst_sym = std::max(worst_sym, ch.max_symmetry_error);
    violations += ch.bound_violations;
    cutpoints += static_cast<std::int64_t>(ch.cutpoints.size());
    predicted.push_back(ch.k_star * ch.cutpoint_time_fraction);
    measured.push_back(variance_diffusivity(env, n_grid, static_cast<std::size_t>(c.walks), seed).sigma2);
  }
  const double kp = mean(predicted), km = mean(measured);
  o.verdicts.push_back(check_range("q_symmetry_error", worst_sym, std::nullopt, c.tol_symmetry, "max |Q(j,j+1) - Q(j+1,j)|"));
  o.verdicts.push_back(check_range("resistance_bound_violations", static_cast<double>(violations), std::nullopt, 0.0,
                                   "gaps with 1/Q(j,j+1) > 2 (c_{j+1} - c_j)"));
  o.verdicts.push_back(check_range("diffusivity_relative_error", std::abs(kp - km) / km, std::nullopt, c.tol_diffusivity,
                                   "cutpoint K* (time-weighted) vs variance regression"));
  std::vector<double> ratio;
  for (std::size_t i = 0; i < predicted.size(); ++i) ratio.push_back(measured[i] / predicted[i]);
  o.verdicts.push_back(report("diffusivity_median_ratio", median(ratio), "per-environment variance slope / K*"));
  o.metrics["cutpoints"] = {{"environments", c.environments},
                            {"cutpoints", cutpoints},
                            {"k_star_weighted_mean", kp},
                            {"variance_slope_mean", km},
                            {"per_env_predicted", predicted},
                            {"per_env_measured", measured}};
}

// ---- exploration ----

ExplorationConfig exploration_config(const ExperimentConfig& c, int k, std::uint64_t seed) {
  ExplorationConfig e;
  e.params = c.params;
  e.seed = seed;
  e.k = k;
  e.walks = static_cast<std::uint64_t>(c.exploration_walks);
  e.gamma = c.gamma;
  e.rho = c.rho;
  e.rho_floor = c.rho_floor;
  e.pilot = static_cast<std::size_t>(c.pilot);
  e.mc_trials = c.mc_trials;
  return e;
}

void exploration_pipeline(const ExperimentConfig& c, Output& o) {
  std::vector<double> success;
  nlohmann::json per_k = nlohmann::json::array();
  for (int k : c.k) {
    std::int64_t ok = 0, events = 0, coincide = 0, pairs = 0;
    std::array<std::int64_t, 7> codes{};
    double freq_A = 0.0, freq_G = 0.0;
    std::int64_t scans = 0;
    Scales sc;
    for (std::int64_t i = 0; i < c.seeds; ++i) {
      const std::uint64_t seed = derive_key(c.seed, Role::trial, {static_cast<std::uint64_t>(i)});
      const ExplorationResult r = run_exploration(exploration_config(c, k, seed));
      sc = r.scales;
      bool clean = true;
      for (std::size_t w = 0; w < r.state.transcripts.size(); ++w) {
        const WalkTranscript& t = r.state.transcripts[w];
        clean = clean && t.error_free();
        for (std::size_t b = 1; b < 7; ++b) codes[b] += t.errors[b];
        events += static_cast<std::int64_t>(t.long_edges.size());
      }
      ok += clean;
      if (i < 20) {
        const EventReport e = event_scan(r.state, 0);
        freq_A += e.A;
        freq_G += e.G;
        ++scans;
        if (r.state.paths.size() >= 2) {
          const ExplorationState& st = r.state;
          auto nb = [&](const Point& s) { return st.neighbours(s); };
          auto off = [&](const Point& a, const Point& b) { return st.offset(a, b); };
          coincide += long_edge_coincidence(st.paths[0], st.paths[1], nb, off, c.params.d, sc.rho);
          ++pairs;
        }
      }
      if (i == 0 && o.options.write_artifacts && k == c.k.back()) {
        std::ofstream out(o.artifact_path("transcript_k" + std::to_string(k) + ".jsonl"));
        write_transcript_jsonl(r.state, out);
      }
    }
    const double frac = static_cast<double>(ok) / static_cast<double>(c.seeds);
    success.push_back(frac);
    o.log("k = " + std::to_string(k) + ": error-free fraction " + format_double(frac));
    per_k.push_back({{"k", k},
                     {"error_free_fraction", frac},
                     {"rho", sc.rho},
                     {"rho_clamped", sc.rho_clamped},
                     {"rho_formula", sc.rho_formula},
                     {"delta", sc.delta},
                     {"gamma", sc.gamma},
                     {"ball_radius", sc.ball_radius},
                     {"return_cap", sc.return_cap},
                     {"phase_length", sc.phase_length},
                     {"error_codes", codes},
                     {"special_phases", events},
                     {"event_A", scans ? freq_A / scans : 0.0},
                     {"event_G", scans ? freq_G / scans : 0.0},
                     {"F_star", pairs ? static_cast<double>(coincide) / pairs : 0.0}});
  }
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < success.size(); ++i) worst_drop = std::max(worst_drop, success[i - 1] - success[i]);
  o.verdicts.push_back(check_range("success_fraction_drop", worst_drop, std::nullopt, 0.0,
                                   "largest decrease of the error-free fraction between successive k"));
  o.verdicts.push_back(check_range("success_fraction_final", success.back(), c.tol_success, std::nullopt,
                                   "error-free fraction at k = " + std::to_string(c.k.back())));
  o.metrics["exploration"] = per_k;
}

// ---- coupling ----

void coupling_pipeline(const ExperimentConfig& c, Output& o) {
  double ks_max = 0.0;
  std::int64_t well = 0, side = 0, parity = 0;
  nlohmann::json rows = nlohmann::json::array();
  for (std::int64_t f = 0; f < c.fixtures; ++f) {
    Stream s(c.seed, Role::fixture, {static_cast<std::uint64_t>(f)});
    const std::int64_t cap = 1 + static_cast<std::int64_t>(s.below(6));
    const auto [a, b] = random_vstar_sides(s, cap);
    Stream sim(c.seed, Role::vstar, {static_cast<std::uint64_t>(f)});
    const VStarReport r = simulate_vstar(a, b, cap, c.trials, sim);
    ks_max = std::max({ks_max, r.ks_v, r.ks_x});
    well += r.well_defined;
    side += r.side_agree;
    parity += r.parity_agree;
    rows.push_back({{"sizes", {a.size(), b.size()}},
                    {"cap", cap},
                    {"param_v", r.param_v},
                    {"param_x", r.param_x},
                    {"ks_v", r.ks_v},
                    {"ks_x", r.ks_x},
                    {"well_defined", r.well_defined}});
  }
  const double side_frac = well ? static_cast<double>(side) / static_cast<double>(well) : 0.0;
  o.verdicts.push_back(check_range("excursion_ks_max", ks_max, std::nullopt, c.tol_ks,
                                   "KS of R_v, R_x against the geometric law, worst fixture"));
  o.verdicts.push_back(check_range("side_agreement", side_frac, c.tol_side, std::nullopt,
                                   "side at tau* equals 1{R_v > R_x} over well-defined trials"));
  o.verdicts.push_back(report("parity_agreement", well ? static_cast<double>(parity) / well : 0.0));
  o.metrics["vstar"] = rows;

  // Derived processes on exploration transcripts, reported only.
  if (c.params.s > c.params.d && c.params.s < c.params.d + 1) {
    const int k = c.k.front();
    std::vector<double> gaps;
    std::int64_t clean = 0, walks = 0;
    const std::int64_t runs = std::min<std::int64_t>(c.seeds, 10);
    for (std::int64_t i = 0; i < runs; ++i) {
      const std::uint64_t seed = derive_key(c.seed, Role::trial, {static_cast<std::uint64_t>(i)});
      const ExplorationResult r = run_exploration(exploration_config(c, k, seed));
      const TypeSample law(r.pilot);
      const std::vector<double> rates(static_cast<std::size_t>(r.state.grid().cells()), 0.0);
      for (std::size_t w = 0; w < r.state.transcripts.size(); ++w) {
        ++walks;
        if (!r.state.transcripts[w].error_free()) continue;
        ++clean;
        const DerivedPaths d = build_derived_processes(r.state, w, rates, law);
        gaps.push_back(coupling_gap(d) * d.scale);
      }
    }
    o.verdicts.push_back(report("error_free_walks", static_cast<double>(clean), "of " + std::to_string(walks)));
    if (!gaps.empty()) o.verdicts.push_back(report("median_rescaled_gap", median(gaps), "max main-phase |X-hat - X|"));
  }
}

// ---- new-vertex rates and K ----

void kconstant_pipeline(const ExperimentConfig& c, Output& o) {
  const ModelParams& p = c.params;
  const Scales sc = scale_parameters(c.type_k, p.s, p.d, c.gamma, c.rho, c.rho_floor);
  const Environment env = generate_environment(p, c.seed);
  const EnvironmentView view{&env};
  std::unordered_map<VertexId, VertexType> cache;
  auto type_at = [&](VertexId v) {
    const auto it = cache.find(v);
    if (it != cache.end()) return it->second;
    Stream mc(c.seed, Role::trial, {static_cast<std::uint64_t>(v)});
    const LocalReturn r =
        return_probabilities(view, v, sc.ball_radius, sc.return_cap, ReturnMode::automatic, BallRule::reflect, c.mc_trials, mc);
    const VertexType t{r.p, r.d_tilde};
    cache.emplace(v, t);
    return t;
  };
  auto type_of = [&](const Point& x) { return type_at(env.id(x)); };

  Stream pick(c.seed, Role::selection);
  std::vector<VertexType> pilot;
  std::vector<double> pilot_p;
  for (std::int64_t i = 0; i < c.pilot; ++i) {
    const VertexType t = type_at(static_cast<VertexId>(pick.below(static_cast<std::uint64_t>(env.vertex_count()))));
    pilot.push_back(t);
    pilot_p.push_back(t.p);
  }
  const TypeSample law(pilot);
  const std::vector<WalkPath> paths =
      run_ensemble(env, 0, std::int64_t{1} << c.horizon_exp, static_cast<std::uint64_t>(c.walks), c.seed);

  const int main_J = std::find(c.J.begin(), c.J.end(), 8) != c.J.end() ? 8 : c.J.front();
  std::map<int, KReport> by_J;
  std::map<int, RateReport> rates_by_J;
  for (int J : c.J) {
    const TypeGrid grid = quantile_grid(pilot_p, J);
    RateReport rates = new_vertex_rates(paths, type_of, grid, c.chi);
    KReport K = estimate_K(grid, rates.c_cell, law, c.trials, c.seed);
    if (o.options.write_artifacts) {
      std::ofstream out(o.artifact_path("k_report_J" + std::to_string(J) + ".json"));
      out << to_json(K).dump(2) << '\n';
    }
    by_J.emplace(J, std::move(K));
    rates_by_J.emplace(J, std::move(rates));
  }
  const RateReport& main = rates_by_J.at(main_J);
  o.verdicts.push_back(check_range("c_star", main.c_star, 0.0, std::nullopt, "ensemble new-vertex rate, must be > 0"));
  if (!(main.c_star > 0.0)) o.verdicts.back().pass = false;
  o.verdicts.push_back(check_range("rate_max_relative_deviation", main.max_relative_deviation, std::nullopt, c.tol_rate,
                                   "max over walks |N_t/t - C*| / C*"));
  o.verdicts.push_back(check_range("h_fraction_passing", main.fraction_passing, c.tol_h, std::nullopt,
                                   "walks satisfying the per-type rate inequality at chi = " + format_double(c.chi)));
  for (int J : c.J) {
    if (!by_J.count(2 * J)) continue;
    const KReport& a = by_J.at(J);
    const KReport& b = by_J.at(2 * J);
    o.verdicts.push_back(check_range("K_bracket_J" + std::to_string(J), std::abs(a.K - b.K), std::nullopt, 2.0 * a.psi,
                                     "|K_J - K_2J| against 2 psi_J"));
  }
  double k_max = 0.0;
  nlohmann::json ks = nlohmann::json::object();
  for (const auto& [J, K] : by_J) {
    k_max = std::max(k_max, K.K);
    ks[std::to_string(J)] = {{"K", K.K}, {"psi", K.psi}, {"c_star", rates_by_J.at(J).c_star}, {"c_bar", rates_by_J.at(J).c_bar}};
  }
  o.verdicts.push_back(check_range("K_over_c_star", k_max / main.c_star, std::nullopt, 1.0, "K <= C*"));
  o.metrics["kconstant"] = {{"by_J", ks},
                            {"ball_radius", sc.ball_radius},
                            {"return_cap", sc.return_cap},
                            {"horizon", std::int64_t{1} << c.horizon_exp},
                            {"plateau", main.plateau},
                            {"n_t", main.n_t},
                            {"horizons", main.horizons},
                            {"fraction_passing_by_horizon", main.fraction_passing_by_horizon}};
}

}  // namespace

ResultRecord run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ResultRecord rec;
  rec.pipeline = to_string(config.pipeline);
  rec.canonical_config = canonical_form(config);
  rec.config_hash = sha1_hex(rec.canonical_config);
  rec.input_hash = git_blob_hash(rec.canonical_config);
  Output o{rec.verdicts, rec.metrics, rec.artifacts, options, config};
  const auto start = std::chrono::steady_clock::now();
  try {
    validate(config);
    switch (config.pipeline) {
      case Pipeline::stable: scaling_pipeline(config, o, false); break;
      case Pipeline::brownian: scaling_pipeline(config, o, true); break;
      case Pipeline::heatkernel: heatkernel_pipeline(config, o); break;
      case Pipeline::cutpoints: cutpoints_pipeline(config, o); break;
      case Pipeline::exploration: exploration_pipeline(config, o); break;
      case Pipeline::coupling: coupling_pipeline(config, o); break;
      case Pipeline::kconstant: kconstant_pipeline(config, o); break;
    }
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.error = std::string(to_string(config.pipeline)) + " pipeline: " + e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

SweepResult run_sweep(const ExperimentConfig& config, const RunOptions& options) {
  if (config.sweep_s.empty()) throw ConfigError("sweep: sweep_s is empty");
  SweepResult res;
  std::vector<double> alpha_hat;
  for (double s : config.sweep_s) {
    ExperimentConfig c = config;
    c.params.s = s;
    c.out = (std::filesystem::path(config.out) / ("s" + format_double(s))).string();
    ResultRecord r = run_experiment(c, options);
    const auto it = std::find_if(r.verdicts.begin(), r.verdicts.end(), [](const Verdict& v) { return v.name == "scaling_slope"; });
    alpha_hat.push_back(it == r.verdicts.end() ? std::nan("") : 1.0 / it->value);
    res.records.push_back(std::move(r));
  }
  int inversions = 0;
  for (std::size_t i = 1; i < alpha_hat.size(); ++i) inversions += !(alpha_hat[i] > alpha_hat[i - 1]);
  std::string detail = "1/slope must increase with s:";
  for (std::size_t i = 0; i < alpha_hat.size(); ++i) {
    detail += " " + format_double(config.sweep_s[i]) + "->" + format_double(std::round(alpha_hat[i] * 1000) / 1000);
  }
  res.trend = check_range("alpha_hat_monotone_inversions", inversions, std::nullopt, 0.0, detail);
  return res;
}

OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "md" || s == "md-summary") return OutputFormat::md;
  throw std::invalid_argument("unknown format '" + s + "'");
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string verdict_word(const Verdict& v) {
  if (!v.check) return "info";
  return v.pass ? "PASS" : "FAIL";
}

}  // namespace

void write_results(const ResultRecord& r, OutputFormat format, std::ostream& out) {
  switch (format) {
    case OutputFormat::json:
      out << to_json(r).dump(2) << '\n';
      break;
    case OutputFormat::csv:
      out << "name,value,lo,hi,pass,check,detail\n";
      for (const Verdict& v : r.verdicts) {
        out << csv_field(v.name) << ',' << format_double(v.value) << ',' << opt(v.lo) << ',' << opt(v.hi) << ','
            << (v.pass ? "true" : "false") << ',' << (v.check ? "true" : "false") << ',' << csv_field(v.detail) << '\n';
      }
      break;
    case OutputFormat::md:
      out << "# " << r.pipeline << " run\n\n";
      out << "- config hash: `" << r.config_hash << "`\n";
      out << "- input hash: `" << r.input_hash << "`\n";
      out << "- status: " << r.status << (r.error.empty() ? "" : " (" + r.error + ")") << "\n";
      out << "- overall: " << (r.all_pass() ? "PASS" : "FAIL") << "\n\n";
      out << "| check | value | lower | upper | verdict |\n|---|---|---|---|---|\n";
      for (const Verdict& v : r.verdicts) {
        out << "| " << v.name << " | " << format_double(v.value) << " | " << opt(v.lo) << " | " << opt(v.hi) << " | "
            << verdict_word(v) << " |\n";
      }
      break;
  }
}

std::string emit_results(const ResultRecord& r, OutputFormat format, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const char* ext = format == OutputFormat::json ? "json" : format == OutputFormat::csv ? "csv" : "md";
  const std::string path = (std::filesystem::path(dir) / (std::string("result.") + ext)).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_results: cannot write '" + path + "'");
  write_results(r, format, out);
  if (!out) throw std::runtime_error("emit_results: write failed for '" + path + "'");
  return path;
}

void print_summary(const ResultRecord& r, std::ostream& out) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  out << r.pipeline << "  config " << r.config_hash.substr(0, 12) << "  " << secs << " s  "
      << (r.all_pass() ? "PASS" : "FAIL") << '\n';
  if (!r.error.empty()) out << "  error: " << r.error << '\n';
  for (const Verdict& v : r.verdicts) {
    out << "  " << verdict_word(v) << "  " << v.name << " = " << format_double(v.value);
    if (v.lo || v.hi) out << "  [" << opt(v.lo) << ", " << opt(v.hi) << "]";
    if (!v.detail.empty()) out << "  " << v.detail;
    out << '\n';
  }
}

}  // namespace lrp
