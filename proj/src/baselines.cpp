#include "risdelay/baselines.hpp"

#include <cmath>

#include "risdelay/common.hpp"
#include "risdelay/kernels.hpp"

namespace risdelay::baselines {
namespace {

class RandomPolicy : public Policy {
 public:
  std::string name() const override { return "random"; }
  void begin_episode(std::uint64_t seed) override { rng_ = make_rng(seed, Stream::kPolicy); }
  Action act(const env::Environment& env) override {
    return random_action(env.config().dims, rng_);
  }

 private:
  Rng rng_{0};
};

class MaxSumRatePolicy : public Policy {
 public:
  explicit MaxSumRatePolicy(int sweeps) : sweeps_(sweeps) {}
  std::string name() const override { return "max_sum_rate"; }
  Action act(const env::Environment& env) override {
    return max_sum_rate_action(env.state().freq, sweeps_);
  }

 private:
  int sweeps_;
};

class NoRisPolicy : public Policy {
 public:
  std::string name() const override { return "no_ris"; }
  Action act(const env::Environment& env) override {
    if (env.config().dims.elements != 0) {
      throw ConfigError("no_ris policy requires an environment with M = 0");
    }
    Action a;
    a.assign = best_gain_assignment(env.effective({}));
    return a;
  }
};

class AgentPolicy : public Policy {
 public:
  AgentPolicy(std::string name, ppo::HybridAgent agent, ppo::ActMode mode)
      : name_(std::move(name)), agent_(std::move(agent)), mode_(mode) {}
  std::string name() const override { return name_; }
  void begin_episode(std::uint64_t seed) override { rng_ = make_rng(seed, Stream::kPolicy); }
  Action act(const env::Environment& env) override {
    if (env.config().dims.users != agent_.dims.users ||
        env.config().dims.subcarriers != agent_.dims.subcarriers ||
        env.config().dims.elements != agent_.dims.elements ||
        env.config().dims.antennas != agent_.dims.antennas) {
      throw ConfigError("policy '" + name_ + "' was trained for different dimensions");
    }
    const auto th = ppo::act_theta(agent_, env.flat_state(), mode_, rng_, false);
    const auto views = env.observe_agents(th.phases);
    auto as = ppo::act_assign(agent_, views, mode_, rng_, false);
    return {th.phases, std::move(as.assign)};
  }

 private:
  std::string name_;
  ppo::HybridAgent agent_;
  ppo::ActMode mode_;
  Rng rng_{0};
};

}  // namespace

Action random_action(const channel::Dims& dims, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_int_distribution<int> user(0, dims.users - 1);
  Action a;
  a.phases.resize(dims.elements);
  for (double& p : a.phases) p = canonical_phase(phase(rng));
  a.assign.owner.resize(dims.subcarriers);
  for (int& o : a.assign.owner) o = user(rng);
  return a;
}

phy::Assignment best_gain_assignment(const channel::EffectiveChannel& eff) {
  phy::Assignment a;
  a.owner.assign(eff.subcarriers, 0);
  for (int n = 0; n < eff.subcarriers; ++n) {
    double best = -1.0;
    for (int k = 0; k < eff.users; ++k) {
      const double g = kernels::squared_norm(eff.row(k, n), eff.antennas);
      if (g > best) {
        best = g;
        a.owner[n] = k;
      }
    }
  }
  return a;
}

int strongest_direct_user(const channel::FrequencyChannel& freq) {
  int best_user = 0;
  double best = -1.0;
  for (int k = 0; k < freq.users; ++k) {
    double g = 0.0;
    for (int n = 0; n < freq.subcarriers; ++n) {
      g += kernels::squared_norm(freq.direct_row(k, n), freq.antennas);
    }
    if (g > best) {
      best = g;
      best_user = k;
    }
  }
  return best_user;
}

namespace {

// arg( sum_n sum_t conj(c_{k,n,m,t}) * target_{n,t} )
double align_element(const channel::FrequencyChannel& freq, int k, int m,
                     const std::vector<Complex>& target) {
  Complex acc{};
  const int Nt = freq.antennas;
  for (int n = 0; n < freq.subcarriers; ++n) {
    for (int t = 0; t < Nt; ++t) {
      acc += std::conj(freq.cascaded_at(k, n, m, t)) * target[static_cast<std::size_t>(n) * Nt + t];
    }
  }
  return canonical_phase(std::arg(acc));
}

}  // namespace

std::vector<double> align_phases(const channel::FrequencyChannel& freq, int user) {
  const int Nt = freq.antennas;
  std::vector<Complex> direct(static_cast<std::size_t>(freq.subcarriers) * Nt);
  for (int n = 0; n < freq.subcarriers; ++n) {
    for (int t = 0; t < Nt; ++t) direct[static_cast<std::size_t>(n) * Nt + t] = freq.direct_row(user, n)[t];
  }
  std::vector<double> phases(freq.elements);
  for (int m = 0; m < freq.elements; ++m) phases[m] = align_element(freq, user, m, direct);
  return phases;
}

Action max_sum_rate_action(const channel::FrequencyChannel& freq, int refinement_sweeps) {
  Action a;
  const int k = strongest_direct_user(freq);
  a.phases = align_phases(freq, k);

  const int N = freq.subcarriers, Nt = freq.antennas;
  for (int sweep = 0; sweep < refinement_sweeps; ++sweep) {
    // total[n, t] = direct + sum_m e^{j theta_m} c_m for the reference user
    std::vector<Complex> total(static_cast<std::size_t>(N) * Nt);
    for (int n = 0; n < N; ++n) {
      for (int t = 0; t < Nt; ++t) {
        Complex v = freq.direct_row(k, n)[t];
        for (int m = 0; m < freq.elements; ++m) {
          v += std::polar(1.0, a.phases[m]) * freq.cascaded_at(k, n, m, t);
        }
        total[static_cast<std::size_t>(n) * Nt + t] = v;
      }
    }
    for (int m = 0; m < freq.elements; ++m) {
      const Complex w_old = std::polar(1.0, a.phases[m]);
      for (int n = 0; n < N; ++n) {
        for (int t = 0; t < Nt; ++t) total[static_cast<std::size_t>(n) * Nt + t] -= w_old * freq.cascaded_at(k, n, m, t);
      }
      a.phases[m] = align_element(freq, k, m, total);
      const Complex w_new = std::polar(1.0, a.phases[m]);
      for (int n = 0; n < N; ++n) {
        for (int t = 0; t < Nt; ++t) total[static_cast<std::size_t>(n) * Nt + t] += w_new * freq.cascaded_at(k, n, m, t);
      }
    }
  }
  a.assign = best_gain_assignment(channel::effective_channel(freq, a.phases));
  return a;
}

std::unique_ptr<Policy> make_random_policy() { return std::make_unique<RandomPolicy>(); }

std::unique_ptr<Policy> make_max_sum_rate_policy(int refinement_sweeps) {
  return std::make_unique<MaxSumRatePolicy>(refinement_sweeps);
}

std::unique_ptr<Policy> make_no_ris_policy(const env::EnvConfig& cfg) {
  if (cfg.dims.elements != 0) {
    throw ConfigError("no_ris policy requires dims.elements = 0, got " +
                      std::to_string(cfg.dims.elements));
  }
  return std::make_unique<NoRisPolicy>();
}

std::unique_ptr<Policy> make_agent_policy(std::string name, ppo::HybridAgent agent,
                                          ppo::ActMode mode) {
  return std::make_unique<AgentPolicy>(std::move(name), std::move(agent), mode);
}

std::unique_ptr<Policy> make_max_min_rate_policy(const std::filesystem::path& stage1_checkpoint,
                                                 const channel::Dims& dims,
                                                 const ppo::PpoConfig& cfg) {
  auto agent = ppo::make_agent(dims, cfg, cfg.seed);
  ppo::load_agent(stage1_checkpoint, agent);
  return make_agent_policy("max_min_rate", std::move(agent), ppo::ActMode::kDeterministic);
}

}  // namespace risdelay::baselines
