#pragma once

// Run configuration. The JSON form of the built-in defaults doubles as the
// schema: user files may only contain keys present there, with matching
// types. Numeric fields additionally accept the strings "inf" and "-inf".

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "risdelay/env.hpp"
#include "risdelay/ppo/agents.hpp"

namespace risdelay::harness {

struct RunMeta {
  std::string name = "run";
  std::uint64_t seed = 1;
  std::string output_dir;  // empty: <output root>/<name>
  std::string policy = "proposed";
  int eval_seeds = 20;
  std::uint64_t eval_seed_base = 1;
  env::PositionMode eval_position_mode = env::PositionMode::kPerEpisode;
};

// Sets lambda from the no-RIS service capacity when load_fraction > 0:
// lambda_k = load_fraction * capacity / K, capacity being the mean over
// sampled slots of sum_k floor(T R_k / L) under best-gain assignment with M=0.
struct CalibrationConfig {
  double load_fraction = 0.0;
  int episodes = 4;
  int slots = 250;
  std::uint64_t seed = 99;
};

struct BaselineConfig {
  int max_sum_rate_sweeps = 0;
};

struct RobustnessVariant {
  std::string name;
  nlohmann::json overrides = nlohmann::json::object();  // partial config
};

struct SweepConfig {
  std::vector<double> lambda_values;   // absolute per-user lambda
  std::vector<double> load_fractions;  // used instead of lambda_values when non-empty
  std::vector<double> gap_fractions;   // gap as a fraction of the mean lambda
  std::vector<int> element_values;
  double burst_scale_slots = 300.0 / 9.5;  // burst size in slots' worth of mean arrivals
  std::vector<std::int64_t> burst_slots{100, 400, 700};
  std::vector<RobustnessVariant> robustness;
};

struct RunConfig {
  std::string preset = "paper";
  RunMeta run;
  env::EnvConfig env;
  CalibrationConfig calibration;
  ppo::PpoConfig ppo;
  BaselineConfig baselines;
  SweepConfig sweeps;
};

std::string to_string(env::PositionMode m);
env::PositionMode position_mode_from_string(const std::string& s);

// "paper" (full-scale constants) or "desk" (K=2, N=4, M=8, Nt=2).
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const RunConfig& cfg);
// Interprets a complete JSON document (as produced by to_json).
RunConfig from_json(const nlohmann::json& j);

// Rejects keys absent from `schema` and mismatched types; the error names
// the offending field path.
void check_against_schema(const nlohmann::json& value, const nlohmann::json& schema,
                          const std::string& path = "");

// Loads a preset (from the document's "preset" key, or `default_preset`),
// overlays the document, applies "a.b.c=value" overrides and validates.
RunConfig load_config(const nlohmann::json& doc, const std::vector<std::string>& overrides = {},
                      const std::string& default_preset = "paper");
RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {},
                           const std::string& default_preset = "paper");

// Applies a partial JSON document on top of an existing config.
RunConfig with_overrides(const RunConfig& base, const nlohmann::json& patch);
void apply_override(nlohmann::json& doc, const std::string& assignment);

void validate(const RunConfig& cfg);

// Stable hash of the fields that determine a training run.
std::string training_hash(const RunConfig& cfg);

}  // namespace risdelay::harness
