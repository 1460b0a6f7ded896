#include "risdelay/ppo/update.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "risdelay/common.hpp"
#include "risdelay/nn/heads.hpp"
#include "risdelay/ppo/gae.hpp"
#include "risdelay/ppo/losses.hpp"

namespace risdelay::ppo {
namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericalError(std::string("non-finite value in ") + what + " at index " +
                           std::to_string(i));
    }
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

void apply_update(std::vector<double>& params, std::vector<double>& grads, nn::AdamState& opt,
                  double grad_clip, const char* what) {
  require_finite(grads, what);
  nn::clip_grad_norm(grads, grad_clip);
  nn::adam_step(params, grads, opt);
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, int size, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += size) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(size));
    out.emplace_back(idx.begin() + start, idx.begin() + end);
  }
  return out;
}

// One critic step on a minibatch. Returns the minibatch loss.
double critic_step(nn::Mlp& critic, nn::AdamState& opt, const PpoConfig& cfg,
                   const std::vector<std::vector<double>>& pool, const std::vector<int>& state,
                   const std::vector<int>& next_state, const std::vector<double>& reward,
                   const std::vector<double>& returns,
                   double target_gamma, const std::vector<std::size_t>& mb) {
  std::vector<nn::Tape> tapes(mb.size());
  std::vector<double> pred(mb.size());
  std::vector<double> targets(mb.size());
  for (std::size_t j = 0; j < mb.size(); ++j) {
    const std::size_t i = mb[j];
    pred[j] = critic.forward(pool[state[i]], tapes[j])[0];
    if (cfg.critic_target == CriticTarget::kGae) {
      targets[j] = returns[i];
    } else {
      // Next-state value from the current critic, held constant.
      const double next = critic.forward(pool[next_state[i]])[0];
      targets[j] = reward[i] + target_gamma * next;
    }
  }
  const auto terms = regression_loss(pred, targets);
  require_finite(terms.loss, "critic loss");
  std::vector<double> grads(critic.param_count(), 0.0);
  for (std::size_t j = 0; j < mb.size(); ++j) {
    const double g = terms.grad_values[j];
    critic.backward(tapes[j], std::span<const double>(&g, 1), grads);
  }
  apply_update(critic.params(), grads, opt, cfg.grad_clip, "critic gradient");
  return terms.loss;
}

std::vector<double> normalized_advantages(const std::vector<double>& reward,
                                          const std::vector<double>& value,
                                          const std::vector<double>& next_value,
                                          const std::vector<std::uint8_t>& done,
                                          const PpoConfig& cfg, std::vector<double>& returns) {
  auto g = gae(reward, value, next_value, done, cfg.gamma, cfg.gae_lambda);
  returns = g.returns;
  normalize(g.advantages);
  require_finite(g.advantages, "advantages");
  return g.advantages;
}

void finish_metrics(UpdateMetrics& m, int steps) {
  if (steps == 0) return;
  m.actor_loss /= steps;
  m.critic_loss /= steps;
  m.entropy /= steps;
  m.mean_ratio /= steps;
  m.clip_fraction /= steps;
  m.approx_kl /= steps;
}

}  // namespace

void ThetaBuffer::clear() {
  states.clear();
  state.clear();
  next_state.clear();
  u.clear();
  logp.clear();
  reward.clear();
  value.clear();
  next_value.clear();
  done.clear();
}

void AssignBuffer::clear() {
  obs.clear();
  owner.clear();
  logp.clear();
  critic_states.clear();
  state.clear();
  next_state.clear();
  reward.clear();
  value.clear();
  next_value.clear();
  done.clear();
}

UpdateMetrics update_ppo_theta(ThetaBuffer& buf, ThetaAgent& agent, const PpoConfig& cfg,
                               Rng& shuffle_rng) {
  const std::size_t n = buf.size();
  if (n == 0) throw InvalidInput("update_ppo_theta: empty buffer");
  std::vector<double> returns;
  const auto adv = normalized_advantages(buf.reward, buf.value, buf.next_value, buf.done, cfg, returns);

  UpdateMetrics m;
  m.mean_ratio = 0.0;
  int steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_critic = 0.0;
    double epoch_ratio = 0.0;
    int epoch_steps = 0;
    for (const auto& mb : minibatches(n, cfg.minibatch, shuffle_rng)) {
      if (agent.has_actor()) {
        std::vector<nn::Tape> tapes(mb.size());
        std::vector<std::vector<double>> means(mb.size());
        std::vector<double> logp_new(mb.size()), logp_old(mb.size()), a(mb.size());
        for (std::size_t j = 0; j < mb.size(); ++j) {
          const std::size_t i = mb[j];
          means[j] = agent.actor.forward(buf.states[buf.state[i]], tapes[j]);
          logp_new[j] = nn::gaussian_log_prob(means[j], agent.log_std, buf.u[i]);
          logp_old[j] = buf.logp[i];
          a[j] = adv[i];
        }
        const double entropy = nn::gaussian_entropy(agent.log_std);
        const auto terms = clipped_loss(logp_new, logp_old, a, cfg.clip, entropy, cfg.entropy_coef);
        require_finite(terms.loss, "PPO-Theta actor loss");

        std::vector<double> grads(agent.actor.param_count(), 0.0);
        std::vector<double> grad_log_std(agent.log_std.size(), 0.0);
        std::vector<double> grad_mean(agent.log_std.size());
        for (std::size_t j = 0; j < mb.size(); ++j) {
          std::fill(grad_mean.begin(), grad_mean.end(), 0.0);
          nn::gaussian_log_prob_grad(means[j], agent.log_std, buf.u[mb[j]], terms.grad_logp[j],
                                     grad_mean, grad_log_std);
          agent.actor.backward(tapes[j], grad_mean, grads);
        }
        nn::gaussian_entropy_grad(agent.log_std, -cfg.entropy_coef, grad_log_std);
        apply_update(agent.actor.params(), grads, agent.actor_opt, cfg.grad_clip,
                     "PPO-Theta actor gradient");
        apply_update(agent.log_std, grad_log_std, agent.log_std_opt, cfg.grad_clip,
                     "PPO-Theta log-std gradient");

        m.actor_loss += terms.loss;
        m.entropy += entropy;
        m.mean_ratio += terms.mean_ratio;
        m.clip_fraction += terms.clip_fraction;
        m.approx_kl += terms.approx_kl;
        epoch_ratio += terms.mean_ratio;
      } else {
        m.mean_ratio += 1.0;
        epoch_ratio += 1.0;
      }
      const double closs = critic_step(agent.critic, agent.critic_opt, cfg, buf.states, buf.state,
                                       buf.next_state, buf.reward, returns, cfg.gamma, mb);
      m.critic_loss += closs;
      epoch_critic += closs;
      ++steps;
      ++epoch_steps;
    }
    m.critic_loss_per_epoch.push_back(epoch_critic / epoch_steps);
    m.mean_ratio_per_epoch.push_back(epoch_ratio / epoch_steps);
  }
  finish_metrics(m, steps);
  buf.clear();
  return m;
}

UpdateMetrics update_ppo_n(AssignBuffer& buf, AssignAgents& agents, const PpoConfig& cfg,
                           Rng& shuffle_rng) {
  const std::size_t n = buf.size();
  if (n == 0) throw InvalidInput("update_ppo_n: empty buffer");
  const int N = static_cast<int>(buf.obs.front().size());
  std::vector<double> returns;
  const auto adv = normalized_advantages(buf.reward, buf.value, buf.next_value, buf.done, cfg, returns);
  const double target_gamma = cfg.literal_eq22 ? 1.0 : cfg.gamma;

  UpdateMetrics m;
  m.mean_ratio = 0.0;
  int steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_critic = 0.0;
    double epoch_ratio = 0.0;
    int epoch_steps = 0;
    for (const auto& mb : minibatches(n, cfg.minibatch, shuffle_rng)) {
      std::vector<std::vector<double>> grads(agents.actors.size());
      for (std::size_t i = 0; i < agents.actors.size(); ++i) {
        grads[i].assign(agents.actors[i].param_count(), 0.0);
      }
      double mb_ratio = 0.0;
      for (int agent = 0; agent < N; ++agent) {
        const nn::Mlp& net = agents.actor(agent);
        std::vector<nn::Tape> tapes(mb.size());
        std::vector<std::vector<double>> logits(mb.size());
        std::vector<double> logp_new(mb.size()), logp_old(mb.size()), a(mb.size());
        double entropy = 0.0;
        for (std::size_t j = 0; j < mb.size(); ++j) {
          const std::size_t i = mb[j];
          logits[j] = net.forward(buf.obs[i][agent], tapes[j]);
          logp_new[j] = nn::categorical_log_prob(logits[j], buf.owner[i][agent]);
          logp_old[j] = buf.logp[i][agent];
          a[j] = adv[i];
          entropy += nn::categorical_entropy(logits[j]) / static_cast<double>(mb.size());
        }
        const auto terms = clipped_loss(logp_new, logp_old, a, cfg.clip, entropy, cfg.entropy_coef);
        require_finite(terms.loss, "PPO-N actor loss");
        auto& g = grads[agents.shared ? 0 : agent];
        std::vector<double> grad_logits;
        for (std::size_t j = 0; j < mb.size(); ++j) {
          grad_logits.assign(logits[j].size(), 0.0);
          nn::categorical_log_prob_grad(logits[j], buf.owner[mb[j]][agent], terms.grad_logp[j],
                                        grad_logits);
          nn::categorical_entropy_grad(logits[j], -cfg.entropy_coef / static_cast<double>(mb.size()),
                                       grad_logits);
          net.backward(tapes[j], grad_logits, g);
        }
        m.actor_loss += terms.loss / N;
        m.entropy += entropy / N;
        m.clip_fraction += terms.clip_fraction / N;
        m.approx_kl += terms.approx_kl / N;
        mb_ratio += terms.mean_ratio / N;
      }
      for (std::size_t i = 0; i < agents.actors.size(); ++i) {
        apply_update(agents.actors[i].params(), grads[i], agents.actor_opts[i], cfg.grad_clip,
                     "PPO-N actor gradient");
      }
      m.mean_ratio += mb_ratio;
      epoch_ratio += mb_ratio;
      const double closs =
          critic_step(agents.critic, agents.critic_opt, cfg, buf.critic_states, buf.state,
                      buf.next_state, buf.reward, returns, target_gamma, mb);
      m.critic_loss += closs;
      epoch_critic += closs;
      ++steps;
      ++epoch_steps;
    }
    m.critic_loss_per_epoch.push_back(epoch_critic / epoch_steps);
    m.mean_ratio_per_epoch.push_back(epoch_ratio / epoch_steps);
  }
  finish_metrics(m, steps);
  buf.clear();
  return m;
}

}  // namespace risdelay::ppo
