#pragma once

// Actor/critic networks of the hybrid agent: PPO-Theta picks RIS phases from
// the global state, N PPO-N actors pick one owner per subcarrier from their
// local observation, and a centralised critic scores the joint assignment.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "risdelay/env.hpp"
#include "risdelay/nn/adam.hpp"
#include "risdelay/nn/archive.hpp"
#include "risdelay/nn/mlp.hpp"
#include "risdelay/rng.hpp"

namespace risdelay::ppo {

enum class CriticTarget {
  kTd,   // r + gamma * V(s')
  kGae,  // advantage + V(s), the lambda-return
};

struct PpoConfig {
  double gamma = 0.9;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.01;
  int epochs = 10;
  int minibatch = 64;
  double actor_lr = 3e-5;
  double critic_lr = 5e-5;
  int episodes = 300;
  int buffer_capacity = 1000;
  double grad_clip = 0.5;
  std::vector<int> theta_hidden{256, 256};
  std::vector<int> assign_hidden{128, 128};
  std::vector<int> critic_hidden{256, 256};
  nn::Activation hidden_activation = nn::Activation::kTanh;
  double init_log_std = std::log(0.5);
  bool share_assignment_actors = false;
  bool literal_eq22 = false;  // drop gamma from the PPO-N critic target
  CriticTarget critic_target = CriticTarget::kTd;
  double backlog_reward_scale = 1e-2;
  double rate_reward_scale = 1e-6;
  int pretrain_episodes = 100;
  bool transfer_assignment_agents = false;  // also carry PPO-N weights into stage 2
  std::uint64_t seed = 1;
};

void validate(const PpoConfig& cfg);

struct ThetaAgent {
  nn::Mlp actor;                 // state -> pre-squash phase means (absent when M = 0)
  std::vector<double> log_std;   // state-independent, one per element
  nn::Mlp critic;                // state -> V
  nn::AdamState actor_opt;
  nn::AdamState log_std_opt;
  nn::AdamState critic_opt;

  bool has_actor() const { return !log_std.empty(); }
};

struct AssignAgents {
  std::vector<nn::Mlp> actors;  // one per subcarrier, or a single shared one
  nn::Mlp critic;               // critic state -> V
  std::vector<nn::AdamState> actor_opts;
  nn::AdamState critic_opt;
  bool shared = false;

  nn::Mlp& actor(int n) { return actors[shared ? 0 : n]; }
  const nn::Mlp& actor(int n) const { return actors[shared ? 0 : n]; }
};

struct HybridAgent {
  channel::Dims dims;
  ThetaAgent theta;
  AssignAgents assign;
};

HybridAgent make_agent(const channel::Dims& dims, const PpoConfig& cfg, std::uint64_t seed);
void init_theta(HybridAgent& agent, const PpoConfig& cfg, std::uint64_t seed);
void init_assign(HybridAgent& agent, const PpoConfig& cfg, std::uint64_t seed);

enum class ActMode { kSample, kDeterministic };

struct ThetaDecision {
  std::vector<double> u;       // pre-squash sample
  std::vector<double> phases;  // squash(u), canonical
  double logp = 0.0;
  double value = 0.0;
};

struct AssignDecision {
  phy::Assignment assign;
  std::vector<double> logp;  // per agent
  double value = 0.0;
};

// Value estimates are computed only when with_value is set.
ThetaDecision act_theta(const HybridAgent& agent, const std::vector<double>& state, ActMode mode,
                        Rng& rng, bool with_value = true);
AssignDecision act_assign(const HybridAgent& agent, const env::AgentViews& views, ActMode mode,
                          Rng& rng, bool with_value = true);

// Checkpoint tensors: theta.actor, theta.log_std, theta.critic,
// assign.actor.<n>, assign.critic. Optimizer moments are not stored.
nn::Archive to_archive(const HybridAgent& agent);
void save_agent(const std::filesystem::path& stem, const HybridAgent& agent);
// Overwrites the parameters of `agent`; shapes must match. Throws
// ConfigError on a missing file or a shape mismatch.
void load_theta(const std::filesystem::path& stem, HybridAgent& agent);
void load_assign(const std::filesystem::path& stem, HybridAgent& agent);
void load_agent(const std::filesystem::path& stem, HybridAgent& agent);

}  // namespace risdelay::ppo
