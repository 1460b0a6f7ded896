#pragma once

// Paired-seed evaluation, load calibration and cached training runs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "risdelay/baselines.hpp"
#include "risdelay/harness/config.hpp"
#include "risdelay/ppo/training.hpp"

namespace risdelay::harness {

// $RISDELAY_OUTPUT_ROOT, or ./risdelay-out when unset.
std::filesystem::path output_root();
// run.output_dir, or <output root>/<run.name>.
std::filesystem::path run_dir(const RunConfig& cfg);

// Collects invariant violations instead of aborting, so a CLI run can report
// every broken property and exit non-zero at the end.
struct InvariantReport {
  int checks = 0;
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what);
  void merge(const InvariantReport& other);
  bool ok() const { return failures.empty(); }
};

// One row per (run, scenario point, policy, seed).
struct EvalRow {
  std::string run_id;
  std::string scenario;
  std::string variant;
  std::string policy;
  int seed_index = 0;
  std::uint64_t seed = 0;
  std::vector<double> lambda;
  int elements = 0;
  std::optional<double> average_delay_ms;
  std::optional<double> jitter_ms;
  bool delay_flagged = false;  // a user delivered nothing; delay undefined for it
  double mean_return = 0.0;    // sum_t -sum_k q_k
  double mean_backlog = 0.0;   // per slot, summed over users
  double backlog_spread = 0.0;
  std::vector<std::int64_t> arrivals;
  std::vector<std::int64_t> delivered;
  std::vector<int> recovery_slots;
};

const std::vector<std::string>& eval_columns();
std::vector<std::string> to_cells(const EvalRow& row);

struct EpisodeOutcome {
  EvalRow row;
  std::vector<std::vector<std::int64_t>> backlog;  // [k][ledger slot 0..T]
  std::vector<traffic::TraceRow> trace;            // filled when requested
};

// Runs one full episode. Checks queue conservation, phase range, ownership
// and delay bounds into `report`.
EpisodeOutcome run_policy_episode(env::Environment& env, baselines::Policy& policy,
                                  std::uint64_t seed, InvariantReport& report,
                                  bool keep_trace = false);

std::uint64_t eval_seed(const RunMeta& run, int index);

// Mean over sampled slots of sum_k floor(T R_k / L) with M = 0 and
// best-gain assignment, in packets per slot.
double calibrate_capacity(const RunConfig& cfg);

// Fills traffic.lambda_per_slot from the calibrated capacity when
// calibration.load_fraction > 0; otherwise returns cfg unchanged.
RunConfig resolve(const RunConfig& cfg, std::optional<double>* capacity = nullptr);

struct TrainedArtifacts {
  std::string hash;
  std::filesystem::path dir;
  std::filesystem::path stage1;  // empty when pre-training is disabled
  std::filesystem::path final_checkpoint;
  bool from_cache = false;
  std::vector<ppo::EpisodeSummary> pretrain;
  std::vector<ppo::EpisodeSummary> finetune;
  std::string stage1_theta_hash;
  std::string stage2_initial_theta_hash;
  double train_seconds = 0.0;  // wall time of the run that produced the cache entry
};

// Trains with the transfer schedule under <output root>/cache/<training hash>,
// or loads a previous run with the same hash. `cfg` must already be resolved.
TrainedArtifacts train_or_load(const RunConfig& cfg,
                               const std::function<void(const ppo::EpisodeSummary&)>& on_episode = {},
                               bool force = false);

const std::vector<std::string>& training_columns();
void write_training_csv(const std::filesystem::path& path, const std::string& run_id,
                        const TrainedArtifacts& art);

bool policy_needs_training(const std::string& name);
const std::vector<std::string>& policy_names();

// Environment used to evaluate `policy`: eval position mode, and M = 0 for
// no_ris. All other randomness is keyed by seed, so policies stay paired.
env::EnvConfig eval_env(const RunConfig& cfg, const std::string& policy);

std::unique_ptr<baselines::Policy> make_policy(const std::string& name, const RunConfig& cfg,
                                               const TrainedArtifacts* art);

using EpisodeHook = std::function<void(EpisodeOutcome&)>;

// Evaluates `policy` on run.eval_seeds paired seeds.
std::vector<EvalRow> evaluate(const RunConfig& cfg, const std::string& policy,
                              const TrainedArtifacts* art, const std::string& scenario,
                              const std::string& variant, InvariantReport& report,
                              const EpisodeHook& hook = {}, bool keep_trace = false);

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

// Per-policy means over rows, for manifests.
nlohmann::json summarize(const std::vector<EvalRow>& rows);

}  // namespace risdelay::harness
