#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrp/model.hpp"

namespace lrp {

enum class Pipeline { stable, brownian, exploration, coupling, heatkernel, cutpoints, kconstant };

std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& s);

struct ExperimentConfig {
  Pipeline pipeline = Pipeline::stable;
  std::uint64_t seed = 0;
  std::string out = "results";
  int workers = 1;  // recorded only; results never depend on it

  ModelParams params;

  // walks and scaling
  std::vector<int> n_exp{8, 9, 10, 11, 12, 13, 14};
  std::int64_t walks = 500;
  std::vector<int> small_jump_exp;   // empty: skip the small-jump trend
  std::int64_t small_jump_walks = 200;
  Coord small_jump_rho = 2;
  std::int64_t zmax_samples = 0;     // 0: skip the jump-sum envelope
  int zmax_exp = 10;
  std::int64_t ref_paths = 0;        // 0: skip the reference consistency check
  std::int64_t ref_n = 10000;
  std::vector<double> sweep_s;       // sweep mode over s

  // heat kernel
  int t_lo_exp = 6;
  int t_hi_exp = 12;
  Coord window = 0;

  // cutpoints
  std::int64_t environments = 100;

  // coupling and types
  std::int64_t fixtures = 50;
  std::int64_t trials = 10000;
  int type_k = 12;
  std::int64_t mc_trials = 2000;
  std::int64_t pilot = 2000;
  std::vector<int> J{4, 8, 16};
  double chi = 0.05;
  int horizon_exp = 16;

  // exploration
  std::vector<int> k{8, 10, 12};
  std::int64_t seeds = 200;
  std::int64_t exploration_walks = 8;
  std::optional<double> gamma;
  std::optional<Coord> rho;
  Coord rho_floor = 2;

  // tolerances; a missing slope tolerance takes the pipeline default
  std::optional<double> tol_slope;
  double tol_variance = 0.10;
  double tol_symmetry = 1e-10;
  double tol_diffusivity = 0.15;
  double tol_ks = 0.02;
  double tol_side = 1.0;
  double tol_success = 0.9;
  double tol_rate = 0.05;
  double tol_h = 0.95;
  double tol_ref_ks = 0.03;
  double tol_ratio = 0.5;

  double slope_tolerance() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// YAML mapping of flat keys, optionally grouped under the section names
// experiment, model, grid, exploration, tolerance.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);
void validate(const ExperimentConfig& c);

// Every field in a fixed order with shortest round-trip numbers.
std::string canonical_form(const ExperimentConfig& c);
// SHA-1 of the canonical form, hex.
std::string config_hash(const ExperimentConfig& c);
// git blob id: SHA-1 of "blob <size>\0" + content, hex.
std::string git_blob_hash(const std::string& content);
std::string sha1_hex(const std::string& data);

}  // namespace lrp
