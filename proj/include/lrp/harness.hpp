#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrp/config.hpp"

namespace lrp {

struct Verdict {
  std::string name;
  double value = 0.0;
  std::optional<double> lo, hi;  // pass iff lo <= value <= hi
  bool pass = true;
  bool check = true;  // false: reported only
  std::string detail;
};

Verdict check_range(std::string name, double value, std::optional<double> lo, std::optional<double> hi,
                    std::string detail = "");
Verdict report(std::string name, double value, std::string detail = "");

struct ResultRecord {
  std::string pipeline;
  std::string config_hash;  // SHA-1 of the canonical config
  std::string input_hash;   // git blob id of the canonical config
  std::string canonical_config;
  std::vector<Verdict> verdicts;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> artifacts;
  double seconds = 0.0;
  std::string status = "ok";  // ok | error
  std::string error;

  bool all_pass() const;
  // SHA-1 over everything except timing.
  std::string content_hash() const;
};

struct RunOptions {
  bool write_artifacts = false;  // reports and transcripts under config.out
  std::ostream* log = nullptr;
};

// Errors inside the pipeline are caught: the record keeps the verdicts reached
// so far and is marked status = "error".
ResultRecord run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct SweepResult {
  std::vector<ResultRecord> records;  // one per s
  Verdict trend;                      // alpha-hat increasing in s
};
SweepResult run_sweep(const ExperimentConfig& config, const RunOptions& options = {});

enum class OutputFormat { json, csv, md };
OutputFormat parse_format(const std::string& s);

nlohmann::json to_json(const ResultRecord& record);
void write_results(const ResultRecord& record, OutputFormat format, std::ostream& out);
// Writes result.<ext> into `dir`, creating it. Returns the file path.
std::string emit_results(const ResultRecord& record, OutputFormat format, const std::string& dir);

// One-page summary table to a stream.
void print_summary(const ResultRecord& record, std::ostream& out);

}  // namespace lrp
