#include "risdelay/ppo/agents.hpp"

#include "risdelay/common.hpp"
#include "risdelay/nn/heads.hpp"

namespace risdelay::ppo {
namespace {

constexpr double kPolicyOutputGain = 0.01;

void restore(const nn::Archive& a, const std::string& name, std::vector<double>& dst) {
  const auto& src = a.get(name);
  if (src.size() != dst.size()) {
    throw ConfigError("checkpoint tensor '" + name + "' has " + std::to_string(src.size()) +
                      " values, expected " + std::to_string(dst.size()));
  }
  dst = src;
}

}  // namespace

void validate(const PpoConfig& c) {
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("ppo.gamma must lie in (0, 1]");
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0)) {
    throw ConfigError("ppo.gae_lambda must lie in [0, 1]");
  }
  if (!(c.clip > 0.0)) throw ConfigError("ppo.clip must be positive");
  if (c.epochs < 1) throw ConfigError("ppo.epochs must be >= 1");
  if (c.minibatch < 1) throw ConfigError("ppo.minibatch must be >= 1");
  if (!(c.actor_lr > 0.0) || !(c.critic_lr > 0.0)) {
    throw ConfigError("ppo learning rates must be positive");
  }
  if (c.episodes < 0 || c.pretrain_episodes < 0) {
    throw ConfigError("ppo episode counts must be >= 0");
  }
  if (c.buffer_capacity < 1) throw ConfigError("ppo.buffer_capacity must be >= 1");
  if (!(c.grad_clip > 0.0)) throw ConfigError("ppo.grad_clip must be positive");
}

void init_theta(HybridAgent& agent, const PpoConfig& cfg, std::uint64_t seed) {
  const auto& d = agent.dims;
  Rng rng = make_rng(seed, Stream::kInit, 0);
  const int state = static_cast<int>(env::state_size(d));
  auto& th = agent.theta;
  th.log_std.clear();
  if (d.elements > 0) {
    th.actor = nn::Mlp::make(state, cfg.theta_hidden, d.elements, cfg.hidden_activation);
    th.actor.init(rng, kPolicyOutputGain);
    th.log_std.assign(d.elements, cfg.init_log_std);
    th.actor_opt = nn::AdamState(th.actor.param_count(), cfg.actor_lr);
    th.log_std_opt = nn::AdamState(th.log_std.size(), cfg.actor_lr);
  }
  th.critic = nn::Mlp::make(state, cfg.critic_hidden, 1, cfg.hidden_activation);
  th.critic.init(rng, 1.0);
  th.critic_opt = nn::AdamState(th.critic.param_count(), cfg.critic_lr);
}

void init_assign(HybridAgent& agent, const PpoConfig& cfg, std::uint64_t seed) {
  const auto& d = agent.dims;
  Rng rng = make_rng(seed, Stream::kInit, 1);
  auto& as = agent.assign;
  as.shared = cfg.share_assignment_actors;
  const int count = as.shared ? 1 : d.subcarriers;
  const int obs = static_cast<int>(env::observation_size(d));
  as.actors.clear();
  as.actor_opts.clear();
  for (int i = 0; i < count; ++i) {
    auto net = nn::Mlp::make(obs, cfg.assign_hidden, d.users, cfg.hidden_activation);
    net.init(rng, kPolicyOutputGain);
    as.actor_opts.emplace_back(net.param_count(), cfg.actor_lr);
    as.actors.push_back(std::move(net));
  }
  as.critic = nn::Mlp::make(static_cast<int>(env::critic_size(d)), cfg.critic_hidden, 1,
                            cfg.hidden_activation);
  as.critic.init(rng, 1.0);
  as.critic_opt = nn::AdamState(as.critic.param_count(), cfg.critic_lr);
}

HybridAgent make_agent(const channel::Dims& dims, const PpoConfig& cfg, std::uint64_t seed) {
  channel::validate(dims);
  validate(cfg);
  HybridAgent a;
  a.dims = dims;
  init_theta(a, cfg, seed);
  init_assign(a, cfg, seed);
  return a;
}

ThetaDecision act_theta(const HybridAgent& agent, const std::vector<double>& state, ActMode mode,
                        Rng& rng, bool with_value) {
  ThetaDecision d;
  const auto& th = agent.theta;
  if (th.has_actor()) {
    const auto mean = th.actor.forward(state);
    if (mode == ActMode::kSample) {
      d.u = nn::gaussian_sample(mean, th.log_std, rng);
    } else {
      d.u = mean;
    }
    d.logp = nn::gaussian_log_prob(mean, th.log_std, d.u);
    d.phases.resize(d.u.size());
    for (std::size_t m = 0; m < d.u.size(); ++m) d.phases[m] = canonical_phase(nn::squash(d.u[m]));
  }
  if (with_value) d.value = th.critic.forward(state)[0];
  return d;
}

AssignDecision act_assign(const HybridAgent& agent, const env::AgentViews& views, ActMode mode,
                          Rng& rng, bool with_value) {
  const int N = agent.dims.subcarriers;
  if (static_cast<int>(views.observations.size()) != N) {
    throw InvalidInput("act_assign: one observation per subcarrier is required");
  }
  AssignDecision d;
  d.assign.owner.resize(N);
  d.logp.resize(N);
  for (int n = 0; n < N; ++n) {
    const auto logits = agent.assign.actor(n).forward(views.observations[n]);
    const int k = mode == ActMode::kSample ? nn::categorical_sample(logits, rng)
                                           : nn::categorical_argmax(logits);
    d.assign.owner[n] = k;
    d.logp[n] = nn::categorical_log_prob(logits, k);
  }
  if (with_value) d.value = agent.assign.critic.forward(views.critic)[0];
  return d;
}

nn::Archive to_archive(const HybridAgent& agent) {
  nn::Archive a;
  const auto& d = agent.dims;
  a.meta["dims"] = {{"users", d.users},
                    {"subcarriers", d.subcarriers},
                    {"elements", d.elements},
                    {"antennas", d.antennas}};
  a.meta["assign_shared"] = agent.assign.shared;
  if (agent.theta.has_actor()) {
    a.meta["theta_actor_sizes"] = agent.theta.actor.sizes();
    a.put("theta.actor", agent.theta.actor.params());
    a.put("theta.log_std", agent.theta.log_std);
  }
  a.meta["theta_critic_sizes"] = agent.theta.critic.sizes();
  a.put("theta.critic", agent.theta.critic.params());
  for (std::size_t i = 0; i < agent.assign.actors.size(); ++i) {
    a.put("assign.actor." + std::to_string(i), agent.assign.actors[i].params());
  }
  a.meta["assign_actor_sizes"] = agent.assign.actors.front().sizes();
  a.meta["assign_critic_sizes"] = agent.assign.critic.sizes();
  a.put("assign.critic", agent.assign.critic.params());
  return a;
}

void save_agent(const std::filesystem::path& stem, const HybridAgent& agent) {
  nn::save_archive(stem, to_archive(agent));
}

void load_theta(const std::filesystem::path& stem, HybridAgent& agent) {
  const auto a = nn::load_archive(stem);
  if (agent.theta.has_actor()) {
    restore(a, "theta.actor", agent.theta.actor.params());
    restore(a, "theta.log_std", agent.theta.log_std);
  }
  restore(a, "theta.critic", agent.theta.critic.params());
}

void load_assign(const std::filesystem::path& stem, HybridAgent& agent) {
  const auto a = nn::load_archive(stem);
  for (std::size_t i = 0; i < agent.assign.actors.size(); ++i) {
    restore(a, "assign.actor." + std::to_string(i), agent.assign.actors[i].params());
  }
  restore(a, "assign.critic", agent.assign.critic.params());
}

void load_agent(const std::filesystem::path& stem, HybridAgent& agent) {
  load_theta(stem, agent);
  load_assign(stem, agent);
}

}  // namespace risdelay::ppo
