#include <gtest/gtest.h>

#include <cmath>

#include "risdelay/common.hpp"
#include "risdelay/env.hpp"

using namespace risdelay;
using namespace risdelay::env;

namespace {

EnvConfig small_config(int slots = 50) {
  EnvConfig c;
  c.dims = {2, 4, 8, 2};
  c.traffic.lambda_per_slot = {3.0, 3.0};
  c.scenario.episode_slots = slots;
  c.scenario.position_mode = PositionMode::kFixed;
  c.scenario.geometry_seed = 7;
  return c;
}

phy::Assignment round_robin(int K, int N) {
  phy::Assignment a;
  for (int n = 0; n < N; ++n) a.owner.push_back(n % K);
  return a;
}

}  // namespace

TEST(Env, ResetIsDeterministicAndQueuesStartWithArrivals) {
  Environment a(small_config()), b(small_config());
  const auto& sa = a.reset(42);
  const auto& sb = b.reset(42);
  EXPECT_EQ(sa.freq.direct, sb.freq.direct);
  EXPECT_EQ(sa.freq.cascaded, sb.freq.cascaded);
  EXPECT_EQ(sa.backlog, sa.arrivals);
  EXPECT_EQ(sa.arrivals, sb.arrivals);

  Environment c(small_config());
  c.reset(43);
  EXPECT_NE(c.state().freq.direct, sa.freq.direct);
}

TEST(Env, StateSizeAndFlattenRoundTrip) {
  const channel::Dims big{3, 16, 64, 4};
  EXPECT_EQ(state_size(big), 2u * (3 * 16 * 4 + 3 * 16 * 64 * 4) + 2 * 3);

  Environment e(small_config());
  e.reset(1);
  const auto x = e.flat_state();
  ASSERT_EQ(x.size(), state_size(e.config().dims));
  const auto s = unflatten(x, e.config().dims, e.scaling());
  EXPECT_EQ(s.backlog, e.state().backlog);
  EXPECT_EQ(s.arrivals, e.state().arrivals);
  for (std::size_t i = 0; i < s.freq.direct.size(); ++i) {
    EXPECT_NEAR(std::abs(s.freq.direct[i] - e.state().freq.direct[i]),
                0.0, 1e-12 * std::abs(e.state().freq.direct[i]) + 1e-300);
  }
  const auto y = flatten(s, e.scaling());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-12 * (1.0 + std::abs(x[i])));
  std::vector<double> shorter(x.begin(), x.end() - 1);
  EXPECT_THROW(unflatten(shorter, e.config().dims, e.scaling()), InvalidInput);
}

TEST(Env, RewardIsNegativeBacklogAndLedgerAgrees) {
  Environment e(small_config(30));
  e.reset(5);
  const std::vector<double> phases(8, 1.0);
  const auto assign = round_robin(2, 4);
  std::vector<std::int64_t> arrived = e.state().arrivals, served(2, 0);
  while (!e.done()) {
    const auto r = e.step(phases, assign);
    std::int64_t q = 0;
    for (int k = 0; k < 2; ++k) {
      q += r.record.backlog[k];
      arrived[k] += r.record.arrivals[k];
      served[k] += r.record.delivered[k];
      EXPECT_EQ(r.record.delivered[k], std::min(r.record.deliverable[k],
                                                r.record.backlog[k] + r.record.delivered[k] -
                                                    r.record.arrivals[k]));
      EXPECT_EQ(e.ledger().backlog(k), r.record.backlog[k]);
    }
    EXPECT_EQ(r.reward, -static_cast<double>(q));
  }
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(e.ledger().total_arrivals(k), arrived[k]);
    EXPECT_EQ(e.ledger().total_departures(k), served[k]);
  }
  EXPECT_THROW(e.step(phases, assign), EpisodeFinished);
}

TEST(Env, ZeroPowerServesNothing) {
  auto cfg = small_config(10);
  cfg.phy.p_max_dbm = -std::numeric_limits<double>::infinity();
  Environment e(cfg);
  e.reset(2);
  const std::vector<double> phases(8, 0.0);
  while (!e.done()) {
    const auto r = e.step(phases, round_robin(2, 4));
    EXPECT_EQ(r.record.delivered, (std::vector<std::int64_t>{0, 0}));
  }
}

TEST(Env, AgentViewsRecomposeEffectiveChannel) {
  Environment e(small_config());
  e.reset(9);
  std::vector<double> phases{0.1, 0.7, 1.3, 2.0, 2.9, 3.5, 4.4, 6.0};
  const auto eff = e.effective(phases);
  const auto views = e.observe_agents(phases);
  const int K = 2, N = 4, Nt = 2;
  ASSERT_EQ(views.observations.size(), static_cast<std::size_t>(N));
  ASSERT_EQ(views.observations[0].size(), observation_size(e.config().dims));
  ASSERT_EQ(views.critic.size(), critic_size(e.config().dims));
  const double s = e.scaling().effective;
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < Nt; ++t) {
        const Complex h = eff.row(k, n)[t];
        const std::size_t i = 2 * (k * Nt + t);
        EXPECT_NEAR(views.observations[n][i], h.real() * s, 1e-12);
        EXPECT_NEAR(views.observations[n][i + 1], h.imag() * s, 1e-12);
        const std::size_t j = 2 * ((n * K + k) * Nt + t);
        EXPECT_NEAR(views.critic[j], h.real() * s, 1e-12);
        EXPECT_NEAR(views.critic[j + 1], h.imag() * s, 1e-12);
      }
    const std::size_t q0 = 2 * K * Nt;
    for (int k = 0; k < K; ++k) {
      EXPECT_DOUBLE_EQ(views.observations[n][q0 + k], e.state().backlog[k] * e.scaling().queue);
      EXPECT_DOUBLE_EQ(views.observations[n][q0 + K + k], e.state().arrivals[k] * e.scaling().queue);
    }
  }
}

TEST(Env, BurstAddsToItsSlot) {
  auto cfg = small_config(20);
  Environment plain(cfg);
  cfg.scenario.bursts = {{5, 1, 40}};
  Environment burst(cfg);
  plain.reset(3);
  burst.reset(3);
  const std::vector<double> phases(8, 0.0);
  for (int t = 1; t <= 20; ++t) {
    const auto a = plain.step(phases, round_robin(2, 4));
    const auto b = burst.step(phases, round_robin(2, 4));
    EXPECT_EQ(b.record.arrivals[0], a.record.arrivals[0]);
    EXPECT_EQ(b.record.arrivals[1], a.record.arrivals[1] + (t == 5 ? 40 : 0));
  }
}

TEST(Env, ArrivalsIndependentOfPolicy) {
  Environment a(small_config(20)), b(small_config(20));
  a.reset(8);
  b.reset(8);
  const std::vector<double> pa(8, 0.0), pb(8, 3.0);
  phy::Assignment all0{{0, 0, 0, 0}};
  for (int t = 0; t < 20; ++t) {
    const auto ra = a.step(pa, all0);
    const auto rb = b.step(pb, round_robin(2, 4));
    EXPECT_EQ(ra.record.arrivals, rb.record.arrivals);
    EXPECT_EQ(a.state().freq.direct, b.state().freq.direct);
  }
}

TEST(Env, ValidationRejectsBadConfigs) {
  auto cfg = small_config();
  cfg.traffic.lambda_per_slot = {1.0};
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = small_config();
  cfg.dims.subcarriers = 2;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = small_config();
  cfg.scenario.bursts = {{5, 3, 1}};
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = small_config();
  cfg.scenario.lambda_gap = {-5.0, 5.0};
  EXPECT_THROW(validate(cfg), InvalidInput);
}
