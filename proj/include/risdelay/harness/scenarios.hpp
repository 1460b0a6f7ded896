#pragma once

// Scenario sweeps: arrival-rate grid, burst injection, heterogeneous traffic
// gaps, RIS element counts and the robustness variants. Each writes a tidy
// CSV of EvalRows to <out_dir>/sweep_<name>.csv.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "risdelay/harness/runner.hpp"

namespace risdelay::harness {

struct SweepOptions {
  std::vector<std::string> policies;  // empty: the scenario's default set
  std::filesystem::path out_dir;      // empty: run_dir(cfg)
  bool write_traces = true;
  std::function<void(const std::string&)> log;
  std::function<void(const ppo::EpisodeSummary&)> on_episode;
};

struct SweepResult {
  std::string scenario;
  std::vector<EvalRow> rows;
  InvariantReport report;
  std::filesystem::path csv;
};

const std::vector<std::string>& scenario_names();
std::vector<std::string> default_policies(const std::string& scenario);

// round(burst_scale_slots * mean lambda)
std::int64_t burst_packets(const RunConfig& resolved);
// One burst per entry of sweeps.burst_slots; users cycle 0, 1, ..., K-1.
RunConfig with_bursts(const RunConfig& resolved);
// lambda_k + g (1 - 2k/(K-1)) with g = fraction * mean lambda.
RunConfig with_gap(const RunConfig& resolved, double fraction);

// Throws ConfigError for an unknown scenario. `cfg` need not be resolved.
SweepResult run_sweep(const std::string& name, const RunConfig& cfg, const SweepOptions& opts = {});

}  // namespace risdelay::harness
