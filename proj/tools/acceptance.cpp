#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "lrp/config.hpp"
#include "lrp/fixtures.hpp"
#include "lrp/harness.hpp"
#include "lrp/snapshot.hpp"

namespace {

using lrp::ExperimentConfig;
using lrp::Pipeline;

ExperimentConfig base(Pipeline p, double s, std::uint64_t seed) {
  ExperimentConfig c;
  c.pipeline = p;
  c.seed = seed;
  c.params.d = 1;
  c.params.s = s;
  c.params.beta = 1.0;
  c.params.nn_prob_one = true;
  return c;
}

struct Run {
  ExperimentConfig config;
  std::vector<std::string> decisive;  // verdict names that decide the criterion
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::vector<Run> runs;  // empty: oracle equivalence
};

std::vector<Criterion> criteria() {
  std::vector<Criterion> out;

  ExperimentConfig c1 = base(Pipeline::stable, 1.8, 101);
  c1.params.L = lrp::Coord{1} << 21;
  c1.n_exp = {8, 9, 10, 11, 12, 13, 14};
  c1.walks = 500;
  out.push_back({1, "stable scaling exponent", 600, {{c1, {"scaling_slope"}}}});

  ExperimentConfig c2 = base(Pipeline::brownian, 3.0, 102);
  c2.params.L = lrp::Coord{1} << 21;
  c2.walks = 500;
  out.push_back({2, "brownian exponent and variance", 300, {{c2, {"scaling_slope", "variance_ratio_spread"}}}});

  ExperimentConfig c3 = base(Pipeline::cutpoints, 2.5, 103);
  c3.params.L = 100000;
  c3.environments = 100;
  c3.n_exp = {14, 15, 16, 17, 18};
  c3.walks = 40;
  out.push_back({3, "cutpoint invariants and diffusivity", 300,
                 {{c3, {"q_symmetry_error", "resistance_bound_violations", "diffusivity_relative_error"}}}});

  ExperimentConfig c4 = base(Pipeline::coupling, 1.8, 104);
  c4.fixtures = 50;
  c4.trials = 10000;
  c4.params.L = 1024;
  c4.seeds = 1;
  out.push_back({4, "excursion geometric law", 120, {{c4, {"excursion_ks_max", "side_agreement"}}}});

  ExperimentConfig c5 = base(Pipeline::heatkernel, 1.8, 105);
  c5.params.L = lrp::Coord{1} << 16;
  c5.t_lo_exp = 6;
  c5.t_hi_exp = 12;
  out.push_back({5, "heat-kernel exponent", 300, {{c5, {"heat_kernel_slope"}}}});

  ExperimentConfig c6 = base(Pipeline::stable, 1.8, 106);
  c6.params.L = lrp::Coord{1} << 21;
  c6.n_exp = {8, 9, 10};
  c6.walks = 20;
  c6.small_jump_exp = {10, 11, 12, 13, 14, 15, 16};
  c6.small_jump_walks = 200;
  c6.small_jump_rho = 2;
  out.push_back({6, "small-jump negligibility", 180,
                 {{c6, {"small_jump_nonincreasing_steps", "small_jump_ratio"}}}});

  ExperimentConfig c7 = base(Pipeline::stable, 1.8, 107);
  c7.params.L = lrp::Coord{1} << 16;
  c7.n_exp = {8, 9, 10};
  c7.walks = 20;
  c7.zmax_samples = 10000;
  c7.zmax_exp = 10;
  out.push_back({7, "jump-sum tail envelope", 120,
                 {{c7, {"zmax_violations", "zmax_wrong_exponent_violations"}}}});

  ExperimentConfig c8 = base(Pipeline::exploration, 1.8, 108);
  c8.params.L = lrp::Coord{1} << 30;
  c8.k = {8, 10, 12};
  c8.seeds = 200;
  c8.exploration_walks = 8;
  c8.rho_floor = 2;
  out.push_back({8, "exploration success rate", 600, {{c8, {"success_fraction_drop", "success_fraction_final"}}}});

  ExperimentConfig c9 = base(Pipeline::kconstant, 1.8, 109);
  c9.params.L = lrp::Coord{1} << 20;
  c9.walks = 50;
  c9.horizon_exp = 16;
  c9.type_k = 12;
  c9.gamma = 0.25;
  c9.J = {4, 8, 16, 32};
  c9.chi = 0.05;
  out.push_back({9, "ergodic new-vertex rate", 300,
                 {{c9, {"c_star", "rate_max_relative_deviation", "h_fraction_passing"}}}});

  ExperimentConfig c10a = base(Pipeline::stable, 1.8, 110);
  c10a.params.L = lrp::Coord{1} << 16;
  c10a.n_exp = {8, 9, 10};
  c10a.walks = 20;
  c10a.ref_paths = 100000;
  c10a.ref_n = 10000;
  out.push_back({10, "reference consistency and K brackets", 300,
                 {{c10a, {"reference_ks"}},
                  {c9, {"K_bracket_J4", "K_bracket_J8", "K_bracket_J16", "K_over_c_star"}}}});

  out.push_back({11, "oracle equivalence", 120, {}});
  return out;
}

std::string show(const lrp::Verdict& v) {
  std::ostringstream s;
  s << v.name << "=" << lrp::format_double(v.value);
  if (v.lo || v.hi) {
    s << " in [" << (v.lo ? lrp::format_double(*v.lo) : "-inf") << ", " << (v.hi ? lrp::format_double(*v.hi) : "inf")
      << "]";
  }
  return s.str();
}

bool run_criterion(const Criterion& c, const std::string& out_dir, bool verbose) {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::vector<std::string> parts;
  if (c.runs.empty()) {
    const lrp::OracleReport rep = lrp::oracle_equivalence(111);
    pass = rep.fraction >= 0.95;
    parts.push_back("fraction=" + lrp::format_double(rep.fraction) + " in [0.95, inf] (" +
                    std::to_string(rep.pairs_passing) + "/" + std::to_string(rep.pairs) + " pairs, max " +
                    std::to_string(rep.max_states) + " states)");
  }
  for (std::size_t i = 0; i < c.runs.size(); ++i) {
    ExperimentConfig cfg = c.runs[i].config;
    cfg.out = (out_dir.empty() ? "results" : out_dir) + "/criterion" + std::to_string(c.id) + (c.runs.size() > 1 ? "_" + std::to_string(i) : "");
    lrp::RunOptions o;
    o.write_artifacts = !out_dir.empty();
    o.log = verbose ? &std::cerr : nullptr;
    const lrp::ResultRecord r = lrp::run_experiment(cfg, o);
    if (!out_dir.empty()) lrp::emit_results(r, lrp::OutputFormat::json, cfg.out);
    if (r.status != "ok") {
      pass = false;
      parts.push_back("error: " + r.error);
    }
    for (const std::string& name : c.runs[i].decisive) {
      const auto it = std::find_if(r.verdicts.begin(), r.verdicts.end(), [&](const auto& v) { return v.name == name; });
      if (it == r.verdicts.end()) {
        pass = false;
        parts.push_back(name + " missing");
        continue;
      }
      pass = pass && it->pass;
      parts.push_back(show(*it));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  line << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.title << "  ";
  for (std::size_t i = 0; i < parts.size(); ++i) line << (i ? "; " : "") << parts[i];
  line << "  (" << lrp::format_double(std::round(secs * 10) / 10) << " s, budget "
       << lrp::format_double(c.budget_seconds) << " s)";
  std::cout << line.str() << std::endl;
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> which;
  std::string out_dir;
  bool verbose = false;
  app.add_option("--criterion,-c", which, "criterion ids (default: all)")->check(CLI::Range(1, 11));
  app.add_option("--out", out_dir, "directory for result records and artifacts");
  app.add_flag("--verbose,-v", verbose, "pipeline progress on stderr");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> selected(which.begin(), which.end());
  bool all = true;
  for (const Criterion& c : criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    all = run_criterion(c, out_dir, verbose) && all;
  }
  return all ? 0 : 2;
}
