#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "risdelay/baselines.hpp"
#include "risdelay/common.hpp"

using namespace risdelay;
using namespace risdelay::baselines;

namespace {

env::EnvConfig small_env(int M = 8, int slots = 40) {
  env::EnvConfig c;
  c.dims = {2, 4, M, 2};
  c.traffic.lambda_per_slot = {3.0, 3.0};
  c.scenario.episode_slots = slots;
  c.scenario.position_mode = env::PositionMode::kPerEpisode;
  return c;
}

double sum_rate(const env::Environment& e, const Action& a) {
  const auto q = phy::evaluate_link(e.state().freq, a.phases, a.assign, e.noise_power(), e.p_max_w(),
                                    e.config().phy.subcarrier_bw_hz);
  double s = 0.0;
  for (double r : q.rate_per_user) s += r;
  return s;
}

std::vector<env::SlotRecord> rollout(Policy& p, const env::EnvConfig& cfg, std::uint64_t seed) {
  env::Environment e(cfg);
  e.reset(seed);
  p.begin_episode(seed);
  while (!e.done()) {
    const auto a = p.act(e);
    e.step(a.phases, a.assign);
  }
  return e.trace();
}

}  // namespace

TEST(RandomPolicy, PhaseAndOwnerMoments) {
  Rng rng(1);
  const channel::Dims d{3, 16, 8, 2};
  double ps = 0.0, ps2 = 0.0;
  std::vector<int> counts(3, 0);
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    const auto a = random_action(d, rng);
    for (double p : a.phases) {
      ASSERT_GE(p, 0.0);
      ASSERT_LT(p, kTwoPi);
      ps += p;
      ps2 += p * p;
    }
    for (int o : a.assign.owner) ++counts[o];
  }
  const double n = reps * 8.0;
  const double mean = ps / n;
  EXPECT_NEAR(mean, std::numbers::pi, 0.02);
  EXPECT_NEAR(ps2 / n - mean * mean, kTwoPi * kTwoPi / 12.0, 0.05);
  for (int c : counts) EXPECT_NEAR(c / (reps * 16.0), 1.0 / 3.0, 0.01);
}

TEST(MaxSumRate, BeatsRandomOnMostChannels) {
  env::Environment e(small_env());
  Rng rng(2);
  int wins = 0;
  const int trials = 500;
  for (int i = 0; i < trials; ++i) {
    e.reset(1000 + i);
    const auto best = max_sum_rate_action(e.state().freq);
    if (sum_rate(e, best) >= sum_rate(e, random_action(e.config().dims, rng))) ++wins;
  }
  EXPECT_GE(wins, static_cast<int>(0.95 * trials));
}

TEST(MaxSumRate, RefinementNeverWeakensReferenceUser) {
  env::Environment e(small_env());
  for (int i = 0; i < 50; ++i) {
    e.reset(i);
    const auto& f = e.state().freq;
    const int k = strongest_direct_user(f);
    const auto gain = [&](const Action& a) {
      const auto eff = channel::effective_channel(f, a.phases);
      double g = 0.0;
      for (int n = 0; n < f.subcarriers; ++n)
        for (int t = 0; t < f.antennas; ++t) g += std::norm(eff.row(k, n)[t]);
      return g;
    };
    EXPECT_GE(gain(max_sum_rate_action(f, 2)), gain(max_sum_rate_action(f, 0)) * (1.0 - 1e-12));
  }
}

TEST(BestGainAssignment, PicksStrongestUserPerSubcarrier) {
  channel::EffectiveChannel eff;
  eff.users = 2;
  eff.subcarriers = 3;
  eff.antennas = 1;
  // [k][n]
  eff.values = {1.0, 0.1, 2.0, 0.5, 0.7, 2.0};
  const auto a = best_gain_assignment(eff);
  EXPECT_EQ(a.owner, (std::vector<int>{0, 1, 0}));
}

TEST(NoRis, RequiresZeroElements) {
  EXPECT_THROW(make_no_ris_policy(small_env(8)), ConfigError);
  const auto cfg = small_env(0);
  auto p = make_no_ris_policy(cfg);
  const auto trace = rollout(*p, cfg, 4);
  EXPECT_EQ(trace.size(), 40u);

  auto q = make_no_ris_policy(cfg);
  env::Environment wrong(small_env(8));
  wrong.reset(1);
  EXPECT_THROW(q->act(wrong), ConfigError);
}

TEST(Policies, TracesAreDeterministic) {
  const auto cfg = small_env();
  for (int which = 0; which < 2; ++which) {
    auto a = which ? make_max_sum_rate_policy() : make_random_policy();
    auto b = which ? make_max_sum_rate_policy() : make_random_policy();
    const auto ta = rollout(*a, cfg, 17), tb = rollout(*b, cfg, 17);
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t t = 0; t < ta.size(); ++t) {
      EXPECT_EQ(ta[t].owner, tb[t].owner);
      EXPECT_EQ(ta[t].backlog, tb[t].backlog);
      EXPECT_EQ(ta[t].rate_bps, tb[t].rate_bps);
    }
  }
}

TEST(Policies, AgentPolicyRejectsMismatchedDims) {
  ppo::PpoConfig pc;
  pc.theta_hidden = {8};
  pc.assign_hidden = {8};
  pc.critic_hidden = {8};
  auto dims = small_env().dims;
  dims.elements = 4;
  auto p = make_agent_policy("proposed", ppo::make_agent(dims, pc, 1));
  env::Environment e(small_env());
  e.reset(1);
  EXPECT_THROW(p->act(e), ConfigError);
}
