#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lrp/analysis.hpp"
#include "lrp/config.hpp"
#include "lrp/environment.hpp"
#include "lrp/fixtures.hpp"
#include "lrp/harness.hpp"
#include "lrp/snapshot.hpp"

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  std::string format = "json";
  bool artifacts = true;
  bool quiet = false;
};

lrp::ExperimentConfig load(const Globals& g) {
  if (g.config.empty()) throw lrp::ConfigError("--config is required");
  lrp::ExperimentConfig c = lrp::parse_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.out = g.out;
  if (g.workers) c.workers = *g.workers;
  lrp::validate(c);
  return c;
}

int finish(const lrp::ResultRecord& r, const Globals& g) {
  const std::string path = lrp::emit_results(r, lrp::parse_format(g.format), g.out);
  if (!g.quiet) {
    lrp::print_summary(r, std::cout);
    std::cout << "wrote " << path << '\n';
  }
  if (r.status != "ok") return 1;
  return r.all_pass() ? 0 : 2;
}

int run_pipeline(const Globals& g, std::initializer_list<lrp::Pipeline> allowed) {
  lrp::ExperimentConfig c = load(g);
  if (std::find(allowed.begin(), allowed.end(), c.pipeline) == allowed.end()) c.pipeline = *allowed.begin();
  Globals h = g;
  h.out = c.out;
  lrp::RunOptions o;
  o.write_artifacts = g.artifacts;
  o.log = g.quiet ? nullptr : &std::cerr;
  return finish(lrp::run_experiment(c, o), h);
}

int run_gen(const Globals& g) {
  const lrp::ExperimentConfig c = load(g);
  const lrp::Environment env = lrp::generate_environment(c.params, c.seed);
  std::filesystem::create_directories(c.out);
  const std::string path = (std::filesystem::path(c.out) / "environment.txt").string();
  lrp::save_snapshot(env, path);
  const lrp::ClusterLabeling cl = lrp::analyze_clusters(env);
  std::cout << "vertices " << env.vertex_count() << "  edges " << env.edge_count() << "  largest cluster " << cl.n1()
            << "  second " << cl.n2() << "\nwrote " << path << '\n';
  return 0;
}

int run_sweep_cmd(const Globals& g) {
  const lrp::ExperimentConfig c = load(g);
  lrp::RunOptions o;
  o.write_artifacts = g.artifacts;
  o.log = g.quiet ? nullptr : &std::cerr;
  const lrp::SweepResult res = lrp::run_sweep(c, o);
  bool error = false, pass = res.trend.pass;
  const lrp::OutputFormat fmt = lrp::parse_format(g.format);
  for (const lrp::ResultRecord& r : res.records) {
    lrp::emit_results(r, fmt, lrp::parse_config_text(r.canonical_config).out);
    if (!g.quiet) lrp::print_summary(r, std::cout);
    error = error || r.status != "ok";
    pass = pass && r.all_pass();
  }
  std::cout << (res.trend.pass ? "PASS" : "FAIL") << "  " << res.trend.name << " = " << res.trend.value << "  " << res.trend.detail << '\n';
  if (error) return 1;
  return pass ? 0 : 2;
}

// Without --against: Monte Carlo estimators against exact oracles.
// With --against: re-run the config and compare verdicts with a stored record.
int run_verify(const Globals& g, const std::string& against) {
  if (!against.empty()) {
    std::ifstream in(against);
    if (!in) throw std::runtime_error("verify: cannot read '" + against + "'");
    const nlohmann::json stored = nlohmann::json::parse(in);
    const lrp::ExperimentConfig c = lrp::parse_config_text(stored.at("config").get<std::string>());
    const nlohmann::json fresh = lrp::to_json(lrp::run_experiment(c));
    const bool same = fresh.at("verdicts") == stored.at("verdicts") && fresh.at("metrics") == stored.at("metrics");
    std::cout << (same ? "PASS" : "FAIL") << "  rerun of config " << stored.at("config_hash").get<std::string>()
              << (same ? " reproduces" : " differs from") << " the stored verdicts\n";
    return same ? 0 : 2;
  }
  const std::uint64_t seed = g.seed.value_or(1);
  const lrp::OracleReport rep = lrp::oracle_equivalence(seed);
  if (!g.quiet) {
    for (const auto& cmp : rep.comparisons) {
      std::cout << (cmp.pass ? "  ok   " : "  MISS ") << cmp.fixture << ' ' << cmp.estimator << " exact "
                << lrp::format_double(cmp.exact) << " est " << lrp::format_double(cmp.estimate) << " +- "
                << lrp::format_double(cmp.half_width) << '\n';
    }
  }
  const bool pass = rep.fraction >= 0.95;
  std::cout << (pass ? "PASS" : "FAIL") << "  oracle agreement " << rep.pairs_passing << "/" << rep.pairs << " = "
            << lrp::format_double(rep.fraction) << " (need >= 0.95), largest fixture " << rep.max_states << " states\n";
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-range percolation random walk experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "YAML experiment config");
  app.add_option("--seed", g.seed, "override the master seed");
  app.add_option("--out", g.out, "override the output directory");
  app.add_option("--workers", g.workers, "worker count (recorded; results do not depend on it)");
  app.add_option("--format", g.format, "json | csv | md")->check(CLI::IsMember({"json", "csv", "md", "md-summary"}));
  app.add_flag("--quiet", g.quiet, "only the final line");
  bool no_artifacts = false;
  app.add_flag("--no-artifacts", no_artifacts, "skip transcripts and K reports");
  std::string against;

  auto* gen = app.add_subcommand("gen", "generate an environment and write a snapshot");
  auto* walk = app.add_subcommand("walk", "stable or brownian scaling pipeline");
  auto* explore = app.add_subcommand("explore", "exploration process and error codes");
  auto* couple = app.add_subcommand("couple", "geometric-race coupling fixtures");
  auto* estimate = app.add_subcommand("estimate", "exact heat-kernel decay");
  auto* cut = app.add_subcommand("cutpoints", "cutpoint chain and diffusivity");
  auto* kconst = app.add_subcommand("kconst", "new-vertex rates and the constant K");
  auto* sweep = app.add_subcommand("sweep", "scaling pipeline over sweep_s");
  auto* verify = app.add_subcommand("verify", "oracle equivalence, or reproduce a stored record");
  verify->add_option("--against", against, "result.json to reproduce");
  for (auto* sub : {gen, walk, explore, couple, estimate, cut, kconst, sweep, verify}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  g.artifacts = !no_artifacts;
  if (g.format == "md-summary") g.format = "md";

  using lrp::Pipeline;
  try {
    if (*gen) return run_gen(g);
    if (*walk) return run_pipeline(g, {Pipeline::stable, Pipeline::brownian});
    if (*explore) return run_pipeline(g, {Pipeline::exploration});
    if (*couple) return run_pipeline(g, {Pipeline::coupling});
    if (*estimate) return run_pipeline(g, {Pipeline::heatkernel});
    if (*cut) return run_pipeline(g, {Pipeline::cutpoints});
    if (*kconst) return run_pipeline(g, {Pipeline::kconstant});
    if (*sweep) return run_sweep_cmd(g);
    if (*verify) return run_verify(g, against);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
