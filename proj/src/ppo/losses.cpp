#include "risdelay/ppo/losses.hpp"

#include <algorithm>
#include <cmath>

#include "risdelay/common.hpp"

namespace risdelay::ppo {

SurrogateTerms clipped_loss(std::span<const double> logp_new, std::span<const double> logp_old,
                            std::span<const double> advantages, double eps, double entropy,
                            double ent_coef) {
  const std::size_t n = logp_new.size();
  if (logp_old.size() != n || advantages.size() != n || n == 0) {
    throw InvalidInput("clipped_loss: batches must be non-empty and of equal length");
  }
  SurrogateTerms t;
  t.grad_logp.assign(n, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  double objective = 0.0;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = std::exp(logp_new[i] - logp_old[i]);
    const double a = advantages[i];
    const double unclipped = ratio * a;
    const double clipped_val = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * a;
    if (unclipped <= clipped_val) {
      objective += unclipped;
      t.grad_logp[i] = -inv_n * unclipped;
    } else {
      objective += clipped_val;
      ++clipped;
    }
    t.mean_ratio += ratio * inv_n;
    t.approx_kl += (logp_old[i] - logp_new[i]) * inv_n;
  }
  t.loss = -(objective * inv_n + ent_coef * entropy);
  t.clip_fraction = static_cast<double>(clipped) * inv_n;
  return t;
}

CriticTerms critic_loss(std::span<const double> values_pred, std::span<const double> rewards,
                        std::span<const double> next_values, double gamma) {
  if (rewards.size() != values_pred.size() || next_values.size() != values_pred.size()) {
    throw InvalidInput("critic_loss: batches must have equal length");
  }
  std::vector<double> targets(values_pred.size());
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = rewards[i] + gamma * next_values[i];
  return regression_loss(values_pred, targets);
}

CriticTerms regression_loss(std::span<const double> values_pred, std::span<const double> targets) {
  const std::size_t n = values_pred.size();
  if (targets.size() != n || n == 0) {
    throw InvalidInput("regression_loss: batches must be non-empty and of equal length");
  }
  CriticTerms t;
  t.grad_values.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double err = targets[i] - values_pred[i];
    t.loss += err * err * inv_n;
    t.grad_values[i] = -2.0 * err * inv_n;
  }
  return t;
}

void normalize(std::span<double> x) {
  if (x.empty()) return;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  for (double& v : x) v = (v - mean) / (sd + 1e-8);
}

}  // namespace risdelay::ppo
