#include "risdelay/ppo/gae.hpp"

#include "risdelay/common.hpp"

namespace risdelay::ppo {

GaeResult gae(std::span<const double> rewards, std::span<const double> values,
              std::span<const double> next_values, std::span<const std::uint8_t> dones,
              double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n) {
    throw InvalidInput("gae: sequences must have equal length");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double delta = rewards[i] + gamma * next_values[i] - values[i];
    const double carry = dones[i] != 0 ? 0.0 : running;
    running = delta + gamma * lambda * carry;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

}  // namespace risdelay::ppo
