#pragma once

// Reference policies and the learned-policy wrapper used for evaluation.
// Every policy returns an (PhaseVector, Assignment) pair, so constraints on
// ownership and phase range hold by construction.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "risdelay/env.hpp"
#include "risdelay/ppo/agents.hpp"

namespace risdelay::baselines {

struct Action {
  std::vector<double> phases;
  phy::Assignment assign;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Called after env.reset(seed) and before the first act().
  virtual void begin_episode(std::uint64_t seed) { (void)seed; }
  virtual Action act(const env::Environment& env) = 0;
};

// Phases uniform on [0, 2pi)^M, owners uniform on {0..K-1}.
Action random_action(const channel::Dims& dims, Rng& rng);

// Owner of subcarrier n is the user with the largest |h_eff[k, n]|^2; ties go
// to the lower index.
phy::Assignment best_gain_assignment(const channel::EffectiveChannel& eff);

// User with the strongest mean direct gain over subcarriers; ties go to the
// lower index.
int strongest_direct_user(const channel::FrequencyChannel& freq);

// theta_m = arg( sum_n sum_t conj(c_{k,n,m,t}) h_{k,n,t} ) for reference user k,
// rotating each element's cascaded contribution onto the direct channel.
std::vector<double> align_phases(const channel::FrequencyChannel& freq, int user);

// Phase alignment to the strongest-direct user, then best-gain assignment.
// refinement_sweeps > 0 adds coordinate passes that re-align each element to
// the current total channel of that user.
Action max_sum_rate_action(const channel::FrequencyChannel& freq, int refinement_sweeps = 0);

std::unique_ptr<Policy> make_random_policy();
std::unique_ptr<Policy> make_max_sum_rate_policy(int refinement_sweeps = 0);
// Throws ConfigError unless the environment has M = 0.
std::unique_ptr<Policy> make_no_ris_policy(const env::EnvConfig& cfg);
// Wraps a trained agent. Deterministic mode uses the Gaussian mean and the
// categorical argmax.
std::unique_ptr<Policy> make_agent_policy(std::string name, ppo::HybridAgent agent,
                                          ppo::ActMode mode = ppo::ActMode::kDeterministic);
// Loads the stage-1 (min-rate) checkpoint into an agent shaped for `dims`.
// Throws ConfigError when the checkpoint is missing or mis-shaped.
std::unique_ptr<Policy> make_max_min_rate_policy(const std::filesystem::path& stage1_checkpoint,
                                                 const channel::Dims& dims,
                                                 const ppo::PpoConfig& cfg);

}  // namespace risdelay::baselines
