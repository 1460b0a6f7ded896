#pragma once

#include <span>
#include <vector>

namespace risdelay::ppo {

struct SurrogateTerms {
  double loss = 0.0;               // negated objective, to be minimised
  std::vector<double> grad_logp;   // d loss / d logp_new[i]
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;      // share of samples where the clipped branch won
  double approx_kl = 0.0;          // mean(logp_old - logp_new)
};

// -( mean_i min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i) + ent_coef * entropy ),
// r_i = exp(logp_new_i - logp_old_i). `entropy` is a precomputed batch mean;
// its gradient is handled by the caller through the policy head.
SurrogateTerms clipped_loss(std::span<const double> logp_new, std::span<const double> logp_old,
                            std::span<const double> advantages, double eps, double entropy,
                            double ent_coef);

struct CriticTerms {
  double loss = 0.0;
  std::vector<double> grad_values;  // d loss / d values_pred[i]
};

// mean_i (rewards_i + gamma * next_values_i - values_pred_i)^2 with
// next_values held constant.
CriticTerms critic_loss(std::span<const double> values_pred, std::span<const double> rewards,
                        std::span<const double> next_values, double gamma);

// mean_i (targets_i - values_pred_i)^2
CriticTerms regression_loss(std::span<const double> values_pred, std::span<const double> targets);

// In-place (x - mean) / (std + 1e-8) with the population std.
void normalize(std::span<double> x);

}  // namespace risdelay::ppo
