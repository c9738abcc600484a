#include "lrp/config.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "lrp/snapshot.hpp"

namespace lrp {

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::stable: return "stable";
    case Pipeline::brownian: return "brownian";
    case Pipeline::exploration: return "exploration";
    case Pipeline::coupling: return "coupling";
    case Pipeline::heatkernel: return "heatkernel";
    case Pipeline::cutpoints: return "cutpoints";
    case Pipeline::kconstant: return "kconstant";
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& s) {
  for (Pipeline p : {Pipeline::stable, Pipeline::brownian, Pipeline::exploration, Pipeline::coupling,
                     Pipeline::heatkernel, Pipeline::cutpoints, Pipeline::kconstant}) {
    if (to_string(p) == s) return p;
  }
  throw std::invalid_argument("unknown pipeline '" + s + "'");
}

double ExperimentConfig::slope_tolerance() const {
  if (tol_slope) return *tol_slope;
  switch (pipeline) {
    case Pipeline::brownian: return 0.05;
    case Pipeline::heatkernel: return 0.20;
    default: return 0.15;
  }
}

namespace {

using Cfg = ExperimentConfig;

struct Field {
  const char* section;
  const char* key;
  bool required;
  std::function<void(Cfg&, const YAML::Node&)> read;
  std::function<std::string(const Cfg&)> write;
};

std::string num(double v) { return format_double(v); }
template <class T>
std::string num_list(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += num(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out + "]";
}

// Integer lists accept a sequence, a single value, or "a..b".
std::vector<int> read_int_list(const YAML::Node& n) {
  std::vector<int> out;
  if (n.IsSequence()) {
    for (const auto& x : n) out.push_back(x.as<int>());
    return out;
  }
  const std::string s = n.as<std::string>();
  const auto dots = s.find("..");
  if (dots == std::string::npos) return {n.as<int>()};
  const int lo = std::stoi(s.substr(0, dots));
  const int hi = std::stoi(s.substr(dots + 2));
  if (hi < lo) throw std::invalid_argument("empty range '" + s + "'");
  for (int i = lo; i <= hi; ++i) out.push_back(i);
  return out;
}

std::vector<double> read_double_list(const YAML::Node& n) {
  std::vector<double> out;
  if (n.IsSequence()) {
    for (const auto& x : n) out.push_back(x.as<double>());
  } else {
    out.push_back(n.as<double>());
  }
  return out;
}

template <class T>
Field scalar(const char* section, const char* key, T Cfg::*member, bool required = false) {
  return Field{section, key, required, [member](Cfg& c, const YAML::Node& n) { c.*member = n.as<T>(); },
               [member](const Cfg& c) {
                 if constexpr (std::is_same_v<T, double>) {
                   return num(c.*member);
                 } else if constexpr (std::is_same_v<T, std::string>) {
                   return c.*member;
                 } else {
                   return std::to_string(c.*member);
                 }
               }};
}

template <class T>
Field optional_scalar(const char* section, const char* key, std::optional<T> Cfg::*member) {
  return Field{section, key, false,
               [member](Cfg& c, const YAML::Node& n) {
                 if (n.IsNull()) {
                   c.*member = std::nullopt;
                 } else {
                   c.*member = n.as<T>();
                 }
               },
               [member](const Cfg& c) -> std::string {
                 if (!(c.*member)) return "null";
                 if constexpr (std::is_same_v<T, double>) {
                   return num(*(c.*member));
                 } else {
                   return std::to_string(*(c.*member));
                 }
               }};
}

Field int_list(const char* section, const char* key, std::vector<int> Cfg::*member) {
  return Field{section, key, false, [member](Cfg& c, const YAML::Node& n) { c.*member = read_int_list(n); },
               [member](const Cfg& c) { return num_list(c.*member); }};
}

template <class T>
Field model(const char* key, T ModelParams::*member, bool required = false) {
  return Field{"model", key, required, [member](Cfg& c, const YAML::Node& n) { c.params.*member = n.as<T>(); },
               [member](const Cfg& c) {
                 if constexpr (std::is_same_v<T, double>) {
                   return num(c.params.*member);
                 } else if constexpr (std::is_same_v<T, bool>) {
                   return std::string(c.params.*member ? "true" : "false");
                 } else {
                   return std::to_string(c.params.*member);
                 }
               }};
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"experiment", "pipeline", true, [](Cfg& c, const YAML::Node& n) { c.pipeline = parse_pipeline(n.as<std::string>()); },
       [](const Cfg& c) { return to_string(c.pipeline); }},
      scalar("experiment", "seed", &Cfg::seed, true),
      scalar("experiment", "out", &Cfg::out),
      scalar("experiment", "workers", &Cfg::workers),

      model("d", &ModelParams::d, true),
      model("s", &ModelParams::s, true),
      model("beta", &ModelParams::beta),
      model("nn", &ModelParams::nn_prob_one),
      model("L", &ModelParams::L),
      {"model", "boundary", false, [](Cfg& c, const YAML::Node& n) { c.params.boundary = parse_boundary(n.as<std::string>()); },
       [](const Cfg& c) { return to_string(c.params.boundary); }},
      {"model", "norm", false, [](Cfg& c, const YAML::Node& n) { c.params.norm = parse_norm(n.as<std::string>()); },
       [](const Cfg& c) { return to_string(c.params.norm); }},

      int_list("grid", "n_exp", &Cfg::n_exp),
      scalar("grid", "walks", &Cfg::walks),
      int_list("grid", "small_jump_exp", &Cfg::small_jump_exp),
      scalar("grid", "small_jump_walks", &Cfg::small_jump_walks),
      scalar("grid", "small_jump_rho", &Cfg::small_jump_rho),
      scalar("grid", "zmax_samples", &Cfg::zmax_samples),
      scalar("grid", "zmax_exp", &Cfg::zmax_exp),
      scalar("grid", "ref_paths", &Cfg::ref_paths),
      scalar("grid", "ref_n", &Cfg::ref_n),
      {"grid", "sweep_s", false, [](Cfg& c, const YAML::Node& n) { c.sweep_s = read_double_list(n); },
       [](const Cfg& c) { return num_list(c.sweep_s); }},
      scalar("grid", "t_lo_exp", &Cfg::t_lo_exp),
      scalar("grid", "t_hi_exp", &Cfg::t_hi_exp),
      scalar("grid", "window", &Cfg::window),
      scalar("grid", "environments", &Cfg::environments),
      scalar("grid", "fixtures", &Cfg::fixtures),
      scalar("grid", "trials", &Cfg::trials),
      scalar("grid", "type_k", &Cfg::type_k),
      scalar("grid", "mc_trials", &Cfg::mc_trials),
      scalar("grid", "pilot", &Cfg::pilot),
      int_list("grid", "J", &Cfg::J),
      scalar("grid", "chi", &Cfg::chi),
      scalar("grid", "horizon_exp", &Cfg::horizon_exp),

      int_list("exploration", "k", &Cfg::k),
      scalar("exploration", "seeds", &Cfg::seeds),
      scalar("exploration", "exploration_walks", &Cfg::exploration_walks),
      optional_scalar("exploration", "gamma", &Cfg::gamma),
      optional_scalar("exploration", "rho", &Cfg::rho),
      scalar("exploration", "rho_floor", &Cfg::rho_floor),

      optional_scalar("tolerance", "tol_slope", &Cfg::tol_slope),
      scalar("tolerance", "tol_variance", &Cfg::tol_variance),
      scalar("tolerance", "tol_symmetry", &Cfg::tol_symmetry),
      scalar("tolerance", "tol_diffusivity", &Cfg::tol_diffusivity),
      scalar("tolerance", "tol_ks", &Cfg::tol_ks),
      scalar("tolerance", "tol_side", &Cfg::tol_side),
      scalar("tolerance", "tol_success", &Cfg::tol_success),
      scalar("tolerance", "tol_rate", &Cfg::tol_rate),
      scalar("tolerance", "tol_h", &Cfg::tol_h),
      scalar("tolerance", "tol_ref_ks", &Cfg::tol_ref_ks),
      scalar("tolerance", "tol_ratio", &Cfg::tol_ratio),
  };
  return fields;
}

const std::set<std::string>& sections() {
  static const std::set<std::string> s = {"experiment", "model", "grid", "exploration", "tolerance"};
  return s;
}

std::string where(const YAML::Node& n) { return "line " + std::to_string(n.Mark().line + 1); }

}  // namespace

void validate(const ExperimentConfig& c) {
  if (!(c.params.s > c.params.d)) {
    throw ConfigError("s must exceed d (got s = " + num(c.params.s) + ", d = " + std::to_string(c.params.d) + ")");
  }
  try {
    c.params.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (c.n_exp.empty() || c.k.empty() || c.J.empty()) throw ConfigError("grids must be nonempty");
  for (int e : c.n_exp) {
    if (e < 0 || e > 40) throw ConfigError("n_exp entries must lie in [0, 40]");
  }
  for (int j : c.J) {
    if (j < 1) throw ConfigError("J entries must be positive");
  }
  if (c.walks < 1 || c.seeds < 1 || c.exploration_walks < 1 || c.environments < 1 || c.fixtures < 1 || c.trials < 1) {
    throw ConfigError("counts must be positive");
  }
  if (c.workers < 1) throw ConfigError("workers must be positive");
  if (c.t_lo_exp < 0 || c.t_hi_exp < c.t_lo_exp) throw ConfigError("heat-kernel grid must satisfy 0 <= t_lo_exp <= t_hi_exp");
  if (!(c.chi > 0.0)) throw ConfigError("chi must be positive");
}

ExperimentConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  if (!root.IsMap()) throw ConfigError("config: top level must be a key-value mapping");

  std::map<std::string, const Field*> by_key;
  for (const Field& f : schema()) by_key[f.key] = &f;
  std::map<std::string, YAML::Node> values;
  auto take = [&](const std::string& key, const YAML::Node& v, const YAML::Node& at, const std::string& section) {
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError("config " + where(at) + ": unknown key '" + key + "'");
    if (!section.empty() && section != it->second->section) {
      throw ConfigError("config " + where(at) + ": key '" + key + "' belongs to section '" + it->second->section + "'");
    }
    if (values.count(key)) throw ConfigError("config " + where(at) + ": duplicate key '" + key + "'");
    values[key] = v;
  };
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (sections().count(key) && kv.second.IsMap()) {
      for (const auto& inner : kv.second) take(inner.first.as<std::string>(), inner.second, inner.first, key);
    } else {
      take(key, kv.second, kv.first, "");
    }
  }
  ExperimentConfig c;
  for (const Field& f : schema()) {
    const auto it = values.find(f.key);
    if (it == values.end()) {
      if (f.required) throw ConfigError(std::string("config: missing required key '") + f.key + "'");
      continue;
    }
    try {
      f.read(c, it->second);
    } catch (const std::exception& e) {
      throw ConfigError("config " + where(it->second) + ": bad value for '" + f.key + "': " + e.what());
    }
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string canonical_form(const ExperimentConfig& c) {
  std::string out;
  std::string section;
  for (const Field& f : schema()) {
    if (section != f.section) {
      section = f.section;
      out += section + ":\n";
    }
    out += "  " + std::string(f.key) + ": " + f.write(c) + "\n";
  }
  return out;
}

std::string sha1_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("sha1: digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

std::string git_blob_hash(const std::string& content) {
  std::string data = "blob " + std::to_string(content.size());
  data.push_back('\0');
  data += content;
  return sha1_hex(data);
}

std::string config_hash(const ExperimentConfig& c) { return sha1_hex(canonical_form(c)); }

}  // namespace lrp
