#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace risdelay::ppo {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

// delta_t = r_t + gamma * next_values[t] - values[t]
// A_t     = delta_t + gamma * lambda * (1 - dones[t]) * A_{t+1}
//
// dones[t] != 0 marks the last transition of an episode and stops the
// recursion there. Bootstrapping is entirely in next_values: pass 0 for a
// true terminal state, the critic's estimate for a time-limit cut.
GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const double> next_values, std::span<const std::uint8_t> dones,
              double gamma, double lambda);

}  // namespace risdelay::ppo
