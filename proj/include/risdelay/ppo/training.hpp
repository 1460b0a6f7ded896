#pragma once

// Episode rollouts of the hybrid agent, per-episode updates and the
// two-stage (min-rate pre-training, backlog fine-tuning) schedule.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "risdelay/env.hpp"
#include "risdelay/ppo/agents.hpp"
#include "risdelay/ppo/update.hpp"

namespace risdelay::ppo {

enum class RewardKind {
  kBacklog,  // -sum_k q_k
  kMinRate,  // min_k R_k
};

// Training reward for one slot, already scaled.
double training_reward(const env::StepResult& step, RewardKind kind, const PpoConfig& cfg);

struct EpisodeSummary {
  int episode = 0;
  std::string stage;
  std::uint64_t seed = 0;
  double raw_return = 0.0;     // sum_t -sum_k q_k, whatever the training reward
  double scaled_return = 0.0;  // sum of the training reward actually optimised
  double mean_backlog = 0.0;   // per slot, summed over users
  double mean_min_rate_bps = 0.0;
  std::optional<double> average_delay_ms;
  std::optional<double> jitter_ms;
  UpdateMetrics theta;
  UpdateMetrics assign;
};

// Runs one episode with the agent. When buffers are given, transitions are
// appended to both; their reward sequences are identical by construction.
EpisodeSummary run_agent_episode(env::Environment& env, const HybridAgent& agent,
                                 std::uint64_t seed, ActMode mode, RewardKind reward,
                                 const PpoConfig& cfg, Rng& policy_rng,
                                 ThetaBuffer* theta_buf = nullptr,
                                 AssignBuffer* assign_buf = nullptr);

std::uint64_t training_episode_seed(std::uint64_t base, const std::string& stage, int episode);

class Trainer {
 public:
  Trainer(env::EnvConfig env_cfg, PpoConfig cfg);

  HybridAgent& agent() { return agent_; }
  const HybridAgent& agent() const { return agent_; }
  env::Environment& environment() { return env_; }
  const PpoConfig& config() const { return cfg_; }

  // Collect one episode, then update PPO-Theta and PPO-N.
  EpisodeSummary train_episode(RewardKind reward, const std::string& stage, int episode);

  std::vector<EpisodeSummary> run_stage(RewardKind reward, const std::string& stage, int episodes,
                                        const std::function<void(const EpisodeSummary&)>& on_episode);

 private:
  env::Environment env_;
  PpoConfig cfg_;
  HybridAgent agent_;
  ThetaBuffer theta_buf_;
  AssignBuffer assign_buf_;
  std::int64_t updates_ = 0;
};

struct TransferOutcome {
  std::vector<EpisodeSummary> pretrain;
  std::vector<EpisodeSummary> finetune;
  std::filesystem::path stage1_checkpoint;
  std::filesystem::path final_checkpoint;
  std::string stage1_theta_hash;         // PPO-Theta actor parameters after stage 1
  std::string stage2_initial_theta_hash; // the same parameters as loaded for stage 2
};

// Stage 1 trains with the min-rate reward and saves `<dir>/stage1`. Stage 2
// builds a fresh agent, loads PPO-Theta (and optionally PPO-N) from that
// checkpoint, trains with the backlog reward and saves `<dir>/final`.
// With pretrain_episodes == 0 stage 1 is skipped.
TransferOutcome train_with_transfer(const env::EnvConfig& env_cfg, const PpoConfig& cfg,
                                    const std::filesystem::path& dir,
                                    const std::function<void(const EpisodeSummary&)>& on_episode);

}  // namespace risdelay::ppo
