#include "risdelay/ppo/training.hpp"

#include <algorithm>
#include <limits>

#include "risdelay/common.hpp"
#include "risdelay/nn/archive.hpp"

namespace risdelay::ppo {
namespace {

std::uint64_t stage_tag(const std::string& stage) {
  if (stage == "pretrain") return 1;
  if (stage == "finetune") return 2;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return (h | 4) & 0xffffffffULL;
}

std::string theta_hash(const HybridAgent& agent) {
  if (agent.theta.has_actor()) return nn::hash_hex(agent.theta.actor.params());
  return nn::hash_hex(agent.theta.critic.params());
}

}  // namespace

double training_reward(const env::StepResult& step, RewardKind kind, const PpoConfig& cfg) {
  if (kind == RewardKind::kBacklog) return step.reward * cfg.backlog_reward_scale;
  const auto& r = step.record.rate_bps;
  return *std::min_element(r.begin(), r.end()) * cfg.rate_reward_scale;
}

std::uint64_t training_episode_seed(std::uint64_t base, const std::string& stage, int episode) {
  return derive_seed(base, Stream::kTrainEpisode,
                     (stage_tag(stage) << 32) | static_cast<std::uint32_t>(episode));
}

EpisodeSummary run_agent_episode(env::Environment& env, const HybridAgent& agent,
                                 std::uint64_t seed, ActMode mode, RewardKind reward,
                                 const PpoConfig& cfg, Rng& policy_rng, ThetaBuffer* theta_buf,
                                 AssignBuffer* assign_buf) {
  const bool collect = theta_buf != nullptr && assign_buf != nullptr;
  EpisodeSummary s;
  s.seed = seed;
  env.reset(seed);

  auto flat = env.flat_state();
  auto th = act_theta(agent, flat, mode, policy_rng, collect);
  auto views = env.observe_agents(th.phases);
  auto as = act_assign(agent, views, mode, policy_rng, collect);
  int theta_idx = -1;
  int critic_idx = -1;
  if (collect) {
    theta_buf->states.push_back(flat);
    theta_idx = static_cast<int>(theta_buf->states.size()) - 1;
    assign_buf->critic_states.push_back(views.critic);
    critic_idx = static_cast<int>(assign_buf->critic_states.size()) - 1;
  }

  double min_rate_sum = 0.0;
  int slots = 0;
  while (!env.done()) {
    const auto res = env.step(th.phases, as.assign);
    const double r = training_reward(res, reward, cfg);
    s.raw_return += res.reward;
    s.scaled_return += r;
    min_rate_sum += *std::min_element(res.record.rate_bps.begin(), res.record.rate_bps.end());
    ++slots;

    if (!collect && res.done) break;
    auto next_flat = env.flat_state();
    auto next_th = act_theta(agent, next_flat, mode, policy_rng, collect);
    auto next_views = env.observe_agents(next_th.phases);
    auto next_as = act_assign(agent, next_views, mode, policy_rng, collect);

    if (collect) {
      theta_buf->states.push_back(next_flat);
      const int next_theta_idx = static_cast<int>(theta_buf->states.size()) - 1;
      theta_buf->state.push_back(theta_idx);
      theta_buf->next_state.push_back(next_theta_idx);
      theta_buf->u.push_back(th.u);
      theta_buf->logp.push_back(th.logp);
      theta_buf->reward.push_back(r);
      theta_buf->value.push_back(th.value);
      theta_buf->next_value.push_back(next_th.value);
      theta_buf->done.push_back(res.done ? 1 : 0);

      assign_buf->critic_states.push_back(next_views.critic);
      const int next_critic_idx = static_cast<int>(assign_buf->critic_states.size()) - 1;
      assign_buf->obs.push_back(std::move(views.observations));
      assign_buf->owner.push_back(as.assign.owner);
      assign_buf->logp.push_back(as.logp);
      assign_buf->state.push_back(critic_idx);
      assign_buf->next_state.push_back(next_critic_idx);
      assign_buf->reward.push_back(r);
      assign_buf->value.push_back(as.value);
      assign_buf->next_value.push_back(next_as.value);
      assign_buf->done.push_back(res.done ? 1 : 0);

      theta_idx = next_theta_idx;
      critic_idx = next_critic_idx;
    }
    flat = std::move(next_flat);
    th = std::move(next_th);
    views = std::move(next_views);
    as = std::move(next_as);
  }
  s.mean_backlog = slots > 0 ? -s.raw_return / slots : 0.0;
  s.mean_min_rate_bps = slots > 0 ? min_rate_sum / slots : 0.0;
  const auto stats = env.delay_stats();
  s.average_delay_ms = stats.average_delay_ms;
  s.jitter_ms = stats.jitter_ms;
  return s;
}

Trainer::Trainer(env::EnvConfig env_cfg, PpoConfig cfg)
    : env_(std::move(env_cfg)), cfg_(std::move(cfg)) {
  validate(cfg_);
  // One update per episode, so an episode must fit in the buffer.
  if (env_.config().scenario.episode_slots > cfg_.buffer_capacity) {
    throw ConfigError("scenario.episode_slots exceeds ppo.buffer_capacity");
  }
  agent_ = make_agent(env_.config().dims, cfg_, cfg_.seed);
}

EpisodeSummary Trainer::train_episode(RewardKind reward, const std::string& stage, int episode) {
  const std::uint64_t seed = training_episode_seed(cfg_.seed, stage, episode);
  Rng policy_rng = make_rng(seed, Stream::kPolicy);
  theta_buf_.clear();
  assign_buf_.clear();
  EpisodeSummary s = run_agent_episode(env_, agent_, seed, ActMode::kSample, reward, cfg_,
                                       policy_rng, &theta_buf_, &assign_buf_);
  s.episode = episode;
  s.stage = stage;

  if (theta_buf_.reward != assign_buf_.reward) {
    throw NumericalError("PPO-Theta and PPO-N buffers hold different reward sequences");
  }
  Rng shuffle_theta = make_rng(cfg_.seed, Stream::kShuffle, 2 * static_cast<std::uint64_t>(updates_));
  Rng shuffle_assign =
      make_rng(cfg_.seed, Stream::kShuffle, 2 * static_cast<std::uint64_t>(updates_) + 1);
  ++updates_;
  s.theta = update_ppo_theta(theta_buf_, agent_.theta, cfg_, shuffle_theta);
  s.assign = update_ppo_n(assign_buf_, agent_.assign, cfg_, shuffle_assign);
  return s;
}

std::vector<EpisodeSummary> Trainer::run_stage(
    RewardKind reward, const std::string& stage, int episodes,
    const std::function<void(const EpisodeSummary&)>& on_episode) {
  std::vector<EpisodeSummary> out;
  out.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    out.push_back(train_episode(reward, stage, e));
    if (on_episode) on_episode(out.back());
  }
  return out;
}

TransferOutcome train_with_transfer(const env::EnvConfig& env_cfg, const PpoConfig& cfg,
                                    const std::filesystem::path& dir,
                                    const std::function<void(const EpisodeSummary&)>& on_episode) {
  TransferOutcome out;
  out.stage1_checkpoint = dir / "stage1";
  out.final_checkpoint = dir / "final";

  Trainer finetune(env_cfg, cfg);
  if (cfg.pretrain_episodes > 0) {
    Trainer pretrain(env_cfg, cfg);
    out.pretrain = pretrain.run_stage(RewardKind::kMinRate, "pretrain", cfg.pretrain_episodes,
                                      on_episode);
    save_agent(out.stage1_checkpoint, pretrain.agent());
    out.stage1_theta_hash = theta_hash(pretrain.agent());

    load_theta(out.stage1_checkpoint, finetune.agent());
    if (cfg.transfer_assignment_agents) load_assign(out.stage1_checkpoint, finetune.agent());
    out.stage2_initial_theta_hash = theta_hash(finetune.agent());
  }
  out.finetune = finetune.run_stage(RewardKind::kBacklog, "finetune", cfg.episodes, on_episode);
  save_agent(out.final_checkpoint, finetune.agent());
  return out;
}

}  // namespace risdelay::ppo
