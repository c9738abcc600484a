#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lrp/config.hpp"
#include "lrp/fixtures.hpp"
#include "lrp/harness.hpp"
#include "lrp/local_chain.hpp"
#include "lrp/snapshot.hpp"

using namespace lrp;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("lrp_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

ResultRecord sample_record() {
  ResultRecord r;
  r.pipeline = "cutpoints";
  r.config_hash = "abc";
  r.input_hash = "def";
  r.verdicts.push_back(check_range("slope", 1.2345678901234567, 1.1, 1.4, "a, \"quoted\" detail"));
  r.verdicts.push_back(check_range("count", 3.0, std::nullopt, 0.0));
  r.verdicts.push_back(report("info", 0.1));
  r.metrics["x"] = {1.0, 2.5};
  return r;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const ExperimentConfig c = parse_config_text("pipeline: cutpoints\nd: 1\ns: 2.5\nL: 100000\nseed: 7\n");
  CHECK(c.pipeline == Pipeline::cutpoints);
  CHECK(c.seed == 7);
  CHECK(c.params.L == 100000);
  CHECK(c.params.beta == 1.0);
  CHECK(c.params.nn_prob_one);
  CHECK(c.environments == 100);
  CHECK(c.tol_symmetry == 1e-10);
  CHECK(c.slope_tolerance() == 0.15);
  CHECK_FALSE(c.n_exp.empty());
}

TEST_CASE("sections, lists and ranges") {
  const ExperimentConfig c = parse_config_text(
      "experiment:\n  pipeline: heatkernel\n  seed: 3\nmodel:\n  d: 1\n  s: 1.8\ngrid:\n  n_exp: 4..6\n  J: [2, 4]\n"
      "tolerance:\n  tol_slope: 0.3\n");
  CHECK(c.n_exp == std::vector<int>{4, 5, 6});
  CHECK(c.J == std::vector<int>{2, 4});
  CHECK(c.slope_tolerance() == 0.3);
}

TEST_CASE("validation and parse errors") {
  CHECK_THROWS_WITH_AS(parse_config_text("pipeline: cutpoints\nd: 1\ns: 0.5\nseed: 1\n"), doctest::Contains("s must exceed d"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("pipeline: cutpoints\nd: 1\ns: 2.5\nseed: 1\nbogus: 3\n"),
                       doctest::Contains("line 5"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("pipeline: cutpoints\nd: 1\ns: 2.5\n"), doctest::Contains("seed"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("pipeline: cutpoints\nd: 1\ns: fast\nseed: 1\n"), doctest::Contains("line 3"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config_text("pipeline: cutpoints\nd: 1\ns: 2.5\nseed: 1\nseed: 2\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("model:\n  pipeline: cutpoints\nd: 1\ns: 2.5\nseed: 1\n"),
                       doctest::Contains("section"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("pipeline: nonsense\nd: 1\ns: 2.5\nseed: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("canonical form round-trips and hashes are stable") {
  ExperimentConfig c = parse_config_text("pipeline: exploration\nd: 1\ns: 1.8\nseed: 99\ngamma: 0.3\nsweep_s: [1.2, 1.5]\n");
  c.tol_ks = 0.1 + 0.2;  // needs 17 digits
  const std::string text = canonical_form(c);
  const ExperimentConfig back = parse_config_text(text);
  CHECK(canonical_form(back) == text);
  CHECK(back.tol_ks == c.tol_ks);
  REQUIRE(back.gamma.has_value());
  CHECK(*back.gamma == 0.3);
  CHECK(back.sweep_s == std::vector<double>{1.2, 1.5});
  CHECK(config_hash(back) == config_hash(c));
  ExperimentConfig d = c;
  d.seed = 100;
  CHECK(config_hash(d) != config_hash(c));
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("emit_results is byte-stable and formats agree") {
  const ResultRecord r = sample_record();
  const std::string dir = temp_dir("emit");
  const std::string j1 = slurp(emit_results(r, OutputFormat::json, dir));
  const std::string j2 = slurp(emit_results(r, OutputFormat::json, dir));
  CHECK(j1 == j2);
  const std::string csv = slurp(emit_results(r, OutputFormat::csv, dir));
  CHECK(csv == slurp(emit_results(r, OutputFormat::csv, dir)));
  const std::string md = slurp(emit_results(r, OutputFormat::md, dir));
  CHECK(md.find("| check | value |") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(j1);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "name,value,lo,hi,pass,check,detail");
  for (const auto& v : j.at("verdicts")) {
    REQUIRE(std::getline(lines, line));
    CHECK(line.rfind(v.at("name").get<std::string>() + ",", 0) == 0);
    const std::string value = line.substr(line.find(',') + 1, line.find(',', line.find(',') + 1) - line.find(',') - 1);
    CHECK(parse_double(value) == v.at("value").get<double>());
  }
  CHECK_FALSE(j.at("all_pass").get<bool>());
  CHECK(j.at("verdicts")[1].at("pass") == false);
  CHECK(j.at("verdicts")[2].at("check") == false);
}

TEST_CASE("empty verdict list gives valid empty tables") {
  ResultRecord r;
  r.pipeline = "stable";
  const std::string dir = temp_dir("empty");
  const nlohmann::json j = nlohmann::json::parse(slurp(emit_results(r, OutputFormat::json, dir)));
  CHECK(j.at("verdicts").empty());
  CHECK(j.at("all_pass").get<bool>());
  CHECK(slurp(emit_results(r, OutputFormat::csv, dir)) == "name,value,lo,hi,pass,check,detail\n");
  const std::string md = slurp(emit_results(r, OutputFormat::md, dir));
  CHECK(md.find("|---|---|---|---|---|\n") != std::string::npos);
}

TEST_CASE("unwritable output path is an error") {
  const std::string file = temp_dir("blocker");
  std::ofstream(file) << "x";
  CHECK_THROWS(emit_results(sample_record(), OutputFormat::json, file + "/sub"));
}

TEST_CASE("cutpoints pipeline on a nearest-neighbour environment") {
  ExperimentConfig c = parse_config_text("pipeline: cutpoints\nd: 1\ns: 2.5\nbeta: 0\nL: 2000\nseed: 7\n");
  c.environments = 3;
  c.walks = 2000;
  c.n_exp = {4, 5, 6, 7};
  const ResultRecord r = run_experiment(c);
  REQUIRE(r.status == "ok");
  for (const Verdict& v : r.verdicts) CHECK_MESSAGE(v.pass, v.name);
  const auto& m = r.metrics.at("cutpoints");
  for (double p : m.at("per_env_predicted")) CHECK(p == doctest::Approx(1.0));
  CHECK(r.content_hash() == run_experiment(c).content_hash());
}

TEST_CASE("pipeline errors are captured with context") {
  ExperimentConfig c = parse_config_text("pipeline: cutpoints\nd: 2\ns: 2.5\nL: 16\nseed: 7\n");
  c.environments = 1;
  const ResultRecord r = run_experiment(c);
  CHECK(r.status == "error");
  CHECK(r.error.find("cutpoints pipeline") == 0);
  CHECK_FALSE(r.all_pass());
}

TEST_CASE("worker count does not change verdicts") {
  ExperimentConfig c = parse_config_text("pipeline: heatkernel\nd: 1\ns: 1.8\nL: 4096\nseed: 5\nt_lo_exp: 3\nt_hi_exp: 6\n");
  ExperimentConfig d = c;
  d.workers = 4;
  CHECK(to_json(run_experiment(c)).at("verdicts") == to_json(run_experiment(d)).at("verdicts"));
}

TEST_CASE("oracle fixtures stay small and mostly agree") {
  const OracleReport rep = oracle_equivalence(3, 2, 2000);
  CHECK(rep.max_states <= 2000);
  CHECK(rep.pairs > 0);
  CHECK(rep.fraction >= 0.8);
  for (const auto& c : rep.comparisons) {
    CHECK(c.exact >= 0.0);
    CHECK(c.exact <= 1.0);
  }
}

TEST_CASE("random_ball fixtures are connected with a rooted exit-free origin") {
  Stream s(11, Role::fixture);
  for (int i = 0; i < 50; ++i) {
    const BallGraph g = random_ball(s);
    CHECK(g.size() >= 2);
    CHECK(g.size() <= 7);
    CHECK(g.exits[0] == 0);
    CHECK(return_probability_exact(g, std::nullopt) <= 1.0);
  }
}
