#pragma once

// Rollout buffers and the per-episode PPO updates for both agent families.

#include <cstdint>
#include <vector>

#include "risdelay/ppo/agents.hpp"

namespace risdelay::ppo {

// States are stored once in a pool and referenced by index so that s_{t+1}
// of one transition and s_t of the next share storage.
struct ThetaBuffer {
  std::vector<std::vector<double>> states;
  std::vector<int> state;
  std::vector<int> next_state;
  std::vector<std::vector<double>> u;
  std::vector<double> logp;
  std::vector<double> reward;  // scaled
  std::vector<double> value;
  std::vector<double> next_value;
  std::vector<std::uint8_t> done;

  std::size_t size() const { return reward.size(); }
  void clear();
};

struct AssignBuffer {
  std::vector<std::vector<std::vector<double>>> obs;  // [t][n]
  std::vector<std::vector<int>> owner;                // [t][n]
  std::vector<std::vector<double>> logp;              // [t][n]
  std::vector<std::vector<double>> critic_states;
  std::vector<int> state;
  std::vector<int> next_state;
  std::vector<double> reward;  // scaled, identical to the Theta buffer's
  std::vector<double> value;
  std::vector<double> next_value;
  std::vector<std::uint8_t> done;

  std::size_t size() const { return reward.size(); }
  void clear();
};

struct UpdateMetrics {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  std::vector<double> critic_loss_per_epoch;
  std::vector<double> mean_ratio_per_epoch;
};

// K epochs of shuffled minibatch updates on actor and critic, advantages
// normalised over the whole buffer, gradient norms clipped per network.
// Clears the buffer. Throws NumericalError on a non-finite loss or gradient.
UpdateMetrics update_ppo_theta(ThetaBuffer& buffer, ThetaAgent& agent, const PpoConfig& cfg,
                               Rng& shuffle_rng);

// Each actor uses its own ratio with the advantage of the centralised
// critic. Clears the buffer.
UpdateMetrics update_ppo_n(AssignBuffer& buffer, AssignAgents& agents, const PpoConfig& cfg,
                           Rng& shuffle_rng);

}  // namespace risdelay::ppo
