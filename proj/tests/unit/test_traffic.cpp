#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "risdelay/common.hpp"
#include "risdelay/traffic.hpp"

using namespace risdelay;
using namespace risdelay::traffic;

namespace {

TrafficConfig config(std::vector<double> lambda) {
  TrafficConfig c;
  c.lambda_per_slot = std::move(lambda);
  return c;
}

std::vector<std::vector<std::int64_t>> delivered_delays(const PacketLedger& ledger) {
  std::vector<std::vector<std::int64_t>> out(ledger.users());
  for (int k = 0; k < ledger.users(); ++k) {
    for (const auto& r : ledger.delivered(k)) out[k].push_back(*r.departure_slot - r.arrival_slot);
  }
  return out;
}

}  // namespace

TEST(Deliverable, FloorOfBitsPerSlot) {
  const auto c = config({1.0});
  EXPECT_EQ(deliverable(512e3, c), 1);
  EXPECT_EQ(deliverable(1e6, c), 1);
  EXPECT_EQ(deliverable(1.024e6, c), 2);
  EXPECT_EQ(deliverable(511e3, c), 0);
  EXPECT_EQ(deliverable(0.0, c), 0);
}

TEST(Ledger, ServesBeforeSameSlotArrivals) {
  PacketLedger l(1);
  const std::vector<std::int64_t> d{5}, a{3}, none{0};
  auto out = step(l, d, a, 0);
  EXPECT_EQ(out.delivered[0], 0);
  EXPECT_EQ(l.backlog(0), 3);
  out = step(l, d, none, 1);
  EXPECT_EQ(out.delivered[0], 3);
  EXPECT_EQ(l.backlog(0), 0);
  for (const auto& r : l.delivered(0)) EXPECT_EQ(*r.departure_slot - r.arrival_slot, 1);
}

TEST(Ledger, PartialServiceIsOldestFirst) {
  PacketLedger l(1);
  l.enqueue(0, 2, 0);
  l.enqueue(0, 2, 1);
  EXPECT_EQ(l.serve(0, 3, 2), 3);
  ASSERT_EQ(l.delivered(0).size(), 3u);
  EXPECT_EQ(l.delivered(0)[0].arrival_slot, 0);
  EXPECT_EQ(l.delivered(0)[1].arrival_slot, 0);
  EXPECT_EQ(l.delivered(0)[2].arrival_slot, 1);
  EXPECT_EQ(l.pending(0).front(), 1);
  EXPECT_EQ(l.serve(0, 10, 3), 1);
  EXPECT_EQ(l.serve(0, 10, 4), 0);
  const auto recs = l.records(0);
  EXPECT_EQ(recs.size(), 4u);
}

TEST(DelayStats, WorkedExamples) {
  PacketLedger one(1);
  one.enqueue(0, 1, 0);
  one.serve(0, 1, 1);
  auto s = delay_stats(one, 1e-3);
  ASSERT_TRUE(s.average_delay_ms);
  EXPECT_DOUBLE_EQ(*s.average_delay_ms, 1.0);
  EXPECT_DOUBLE_EQ(*s.jitter_ms, 0.0);

  PacketLedger two(1);
  two.enqueue(0, 1, 0);
  two.serve(0, 1, 1);
  two.enqueue(0, 1, 1);
  two.serve(0, 1, 4);
  s = delay_stats(two, 1e-3);
  EXPECT_DOUBLE_EQ(*s.average_delay_ms, 2.0);
  EXPECT_DOUBLE_EQ(*s.jitter_ms, 1.0);
}

TEST(DelayStats, ExcludesUsersWithoutDeliveries) {
  PacketLedger l(2);
  l.enqueue(0, 1, 0);
  l.serve(0, 1, 2);
  l.enqueue(1, 4, 0);
  auto s = delay_stats(l, 1e-3);
  EXPECT_TRUE(s.has_exclusions());
  EXPECT_FALSE(s.excluded[0]);
  EXPECT_TRUE(s.excluded[1]);
  EXPECT_TRUE(std::isnan(s.user_mean_delay_ms[1]));
  EXPECT_DOUBLE_EQ(*s.average_delay_ms, 2.0);

  PacketLedger idle(2);
  s = delay_stats(idle, 1e-3);
  EXPECT_FALSE(s.average_delay_ms);
  EXPECT_FALSE(s.jitter_ms);
}

TEST(DelayStats, MatchesTwoPassOracle) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const int K = 1 + rep % 4;
    PacketLedger l(K);
    std::uniform_int_distribution<int> arr(0, 4), srv(0, 5);
    for (std::int64_t t = 0; t < 500; ++t) {
      std::vector<std::int64_t> a(K), d(K);
      for (int k = 0; k < K; ++k) {
        a[k] = arr(rng);
        d[k] = srv(rng) * (k == 3 ? 0 : 1);
      }
      step(l, d, a, t);
    }
    const double slot = rep % 2 ? 1e-3 : 0.5e-3;
    const auto s = delay_stats(l, slot);
    const auto o = oracle::two_pass_delay(delivered_delays(l), slot);
    ASSERT_EQ(s.average_delay_ms.has_value(), o.any);
    EXPECT_EQ(*s.average_delay_ms, o.average_delay_ms);
    EXPECT_EQ(*s.jitter_ms, o.jitter_ms);
    for (int k = 0; k < K; ++k) EXPECT_EQ(s.excluded[k], o.excluded[k]);
  }
}

TEST(Ledger, ConservationAndFcfsOverLongTrace) {
  std::mt19937_64 rng(11);
  const int K = 3;
  PacketLedger l(K);
  auto cfg = config({2.0, 9.5, 0.3});
  std::uniform_int_distribution<int> srv(0, 12);
  std::vector<std::int64_t> arrived(K, 0), departed(K, 0);
  for (std::int64_t t = 0; t < 10000; ++t) {
    const auto a = sample_arrivals(cfg, rng);
    std::vector<std::int64_t> d(K);
    for (auto& x : d) x = srv(rng);
    const auto out = step(l, d, a, t);
    for (int k = 0; k < K; ++k) {
      arrived[k] += a[k];
      departed[k] += out.delivered[k];
      ASSERT_EQ(arrived[k] - departed[k], l.backlog(k));
    }
  }
  for (int k = 0; k < K; ++k) {
    EXPECT_EQ(l.total_arrivals(k), arrived[k]);
    EXPECT_EQ(l.total_departures(k), departed[k]);
    std::int64_t prev_arr = -1, prev_dep = -1;
    for (const auto& r : l.delivered(k)) {
      EXPECT_GE(r.arrival_slot, prev_arr);
      EXPECT_GE(*r.departure_slot, prev_dep);
      EXPECT_GE(*r.departure_slot - r.arrival_slot, 1);
      prev_arr = r.arrival_slot;
      prev_dep = *r.departure_slot;
    }
  }
}

TEST(Arrivals, PoissonMeanAndShape) {
  auto cfg = config({2.0, 9.5});
  Rng rng(5);
  const int draws = 200000;
  std::vector<std::vector<std::int64_t>> counts(2, std::vector<std::int64_t>(64, 0));
  std::vector<double> sum(2, 0.0);
  for (int i = 0; i < draws; ++i) {
    const auto a = sample_arrivals(cfg, rng);
    for (int k = 0; k < 2; ++k) {
      sum[k] += a[k];
      if (a[k] < 64) ++counts[k][a[k]];
    }
  }
  EXPECT_NEAR(sum[0] / draws, 2.0, 0.02);
  EXPECT_NEAR(sum[1] / draws, 9.5, 0.095);
  for (int k = 0; k < 2; ++k) {
    const auto chi = oracle::poisson_chi_square(counts[k], draws, cfg.lambda_per_slot[k]);
    // Loose bound: roughly the 1e-6 upper quantile for these dof.
    EXPECT_LT(chi.statistic, chi.dof + 12.0 * std::sqrt(2.0 * chi.dof));
  }
}

TEST(Arrivals, ZeroRateAndValidation) {
  Rng rng(1);
  const auto a = sample_arrivals(config({0.0, 0.0}), rng);
  EXPECT_EQ(a[0], 0);
  EXPECT_EQ(a[1], 0);
  EXPECT_THROW(validate(config({-1.0})), InvalidInput);
}

TEST(Trace, CsvHeaderAndRows) {
  std::vector<TraceRow> rows{{0, 1, 3, 2, 1, 1.5e6}};
  std::ostringstream os;
  write_trace_csv(os, rows);
  const auto text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "slot,user,q,arrivals,delivered,rate_bps");
  EXPECT_NE(text.find("0,1,3,2,1,"), std::string::npos);
}
