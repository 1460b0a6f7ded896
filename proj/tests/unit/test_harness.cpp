#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "risdelay/common.hpp"
#include "risdelay/harness/config.hpp"
#include "risdelay/harness/csv.hpp"
#include "risdelay/harness/metrics.hpp"
#include "risdelay/harness/runner.hpp"
#include "risdelay/harness/scenarios.hpp"

using namespace risdelay;
using namespace risdelay::harness;
using nlohmann::json;
namespace fs = std::filesystem;

TEST(Config, PaperPresetReproducesPublishedConstants) {
  const auto c = preset("paper");
  EXPECT_EQ(c.env.dims.users, 3);
  EXPECT_EQ(c.env.dims.antennas, 4);
  EXPECT_EQ(c.env.dims.elements, 64);
  EXPECT_EQ(c.env.dims.subcarriers, 16);
  EXPECT_EQ(c.env.phy.p_max_dbm, 10.0);
  EXPECT_EQ(c.env.phy.subcarrier_bw_hz, 180e3);
  EXPECT_EQ(c.env.phy.noise_psd_dbm_hz, -174.0);
  EXPECT_EQ(c.env.traffic.lambda_per_slot, (std::vector<double>{9.5, 9.5, 9.5}));
  EXPECT_EQ(c.env.traffic.packet_bits, 512.0);
  EXPECT_EQ(c.env.traffic.slot_seconds, 1e-3);
  EXPECT_EQ(c.env.scenario.episode_slots, 1000);
  const auto& f = c.env.fading;
  EXPECT_EQ(f.beta0_db, -30.0);
  EXPECT_EQ(f.d0_m, 1.0);
  EXPECT_EQ(f.xi_direct, 3.8);
  EXPECT_EQ(f.xi_bs_ris, 2.2);
  EXPECT_EQ(f.xi_ris_user, 2.4);
  EXPECT_EQ(f.k_bs_ris_db, 4.0);
  EXPECT_EQ(f.k_ris_user_db, 5.0);
  EXPECT_EQ(f.taps_direct, 4);
  EXPECT_EQ(f.taps_bs_ris, 2);
  EXPECT_EQ(f.taps_ris_user, 3);
  const auto& g = c.env.geometry;
  EXPECT_EQ(g.bs_ris_vertical_m, 150.0);
  EXPECT_EQ(g.bs_ris_horizontal_m, 130.0);
  EXPECT_EQ(g.annulus_inner_m, 10.0);
  EXPECT_EQ(g.annulus_outer_m, 13.0);
  const auto& p = c.ppo;
  EXPECT_EQ(p.actor_lr, 3e-5);
  EXPECT_EQ(p.entropy_coef, 0.01);
  EXPECT_EQ(p.buffer_capacity, 1000);
  EXPECT_EQ(p.clip, 0.2);
  EXPECT_EQ(c.calibration.load_fraction, 0.0);
  EXPECT_EQ(c.sweeps.lambda_values, (std::vector<double>{8.5, 9.0, 9.5, 10.0}));
}

TEST(Config, DeskPresetDimensions) {
  const auto c = preset("desk");
  EXPECT_EQ(c.env.dims.users, 2);
  EXPECT_EQ(c.env.dims.subcarriers, 4);
  EXPECT_EQ(c.env.dims.elements, 8);
  EXPECT_EQ(c.env.dims.antennas, 2);
  EXPECT_EQ(c.ppo.episodes, 60);
  EXPECT_GT(c.calibration.load_fraction, 0.0);
  EXPECT_NO_THROW(validate(c));
  for (const auto& v : c.sweeps.robustness) EXPECT_NO_THROW(with_overrides(c, v.overrides));
  EXPECT_THROW(preset("laptop"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    const auto j = to_json(c);
    EXPECT_EQ(to_json(from_json(j)), j);
    EXPECT_EQ(training_hash(from_json(j)), training_hash(c));
  }
}

TEST(Config, UnknownKeyNamesFieldPath) {
  try {
    load_config(json{{"ppo", {{"gama", 0.5}}}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ppo.gama"), std::string::npos) << e.what();
  }
  try {
    load_config(json{{"dims", {{"users", "three"}}}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("dims.users"), std::string::npos) << e.what();
  }
}

TEST(Config, OverridesAndInfinity) {
  const auto c = load_config(json::object(), {"ppo.episodes=7", "fading.k_bs_ris_db=\"inf\"", "run.name=abc"},
                             "desk");
  EXPECT_EQ(c.ppo.episodes, 7);
  EXPECT_TRUE(std::isinf(c.env.fading.k_bs_ris_db));
  EXPECT_EQ(c.run.name, "abc");
  EXPECT_EQ(to_json(c)["fading"]["k_bs_ris_db"], "inf");
  EXPECT_THROW(load_config(json::object(), {"ppo.episodes"}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"ppo.gamma=2"}), ConfigError);
}

TEST(Config, TrainingHashIgnoresEvaluationFields) {
  auto a = preset("desk");
  auto b = a;
  b.run.eval_seeds = 3;
  b.sweeps.gap_fractions = {0.5};
  EXPECT_EQ(training_hash(a), training_hash(b));
  b.ppo.actor_lr *= 2.0;
  EXPECT_NE(training_hash(a), training_hash(b));
}

TEST(Csv, RoundTripWithQuotingAndSpecialValues) {
  const auto path = fs::temp_directory_path() / "risdelay_test_csv" / "nested" / "t.csv";
  fs::remove_all(path.parent_path().parent_path());
  {
    CsvWriter w(path, {"a", "b", "c", "d"});
    w.write({cell(0.1), cell("x,\"y\""), cell(std::optional<double>{}), cell(std::vector<int>{1, 2})});
    w.write({cell(std::numeric_limits<double>::infinity()), cell(std::int64_t{-3}), cell(std::nan("")),
             cell("line\nbreak")});
    EXPECT_THROW(w.write({"1"}), InvalidInput);
  }
  const auto rows = read_csv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(std::stod(rows[0].at("a")), 0.1);
  EXPECT_EQ(rows[0].at("b"), "x,\"y\"");
  EXPECT_EQ(rows[0].at("c"), "");
  EXPECT_EQ(rows[0].at("d"), "1;2");
  EXPECT_EQ(rows[1].at("a"), "inf");
  EXPECT_EQ(rows[1].at("b"), "-3");
  EXPECT_EQ(rows[1].at("c"), "");
  EXPECT_EQ(rows[1].at("d"), "line\nbreak");
}

TEST(Metrics, MeanMovingAverageAndPaired) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(mean(v), 2.5);
  EXPECT_EQ(moving_average(v, 2), (std::vector<double>{1.0, 1.5, 2.5, 3.5}));
  const std::vector<double> a{1.0, 2.0, 3.0}, b{2.0, 2.0, 5.0};
  const auto p = paired(a, b);
  EXPECT_EQ(p.n, 3);
  EXPECT_DOUBLE_EQ(p.mean_diff, 1.0);
  // diffs 1, 0, 2: sample sd 1
  EXPECT_NEAR(p.std_error, 1.0 / std::sqrt(3.0), 1e-15);
}

TEST(Metrics, RecoverySlots) {
  const std::vector<std::int64_t> q{0, 5, 100, 80, 30, 9, 3, 50};
  EXPECT_EQ(recovery_slots(q, 2, 100, 7), 3);
  EXPECT_EQ(recovery_slots(q, 2, 40, 7), 4);
  EXPECT_EQ(recovery_slots(q, 2, 20, 7), 5);  // capped
  EXPECT_EQ(recovery_slots(q, 2, 10, 6), 4);  // never below 1 before the cap
  EXPECT_DOUBLE_EQ(backlog_spread({{1, 1, 1}, {4, 5, 6}}), 4.0);
}

TEST(Scenarios, PaperBurstInjectsThreeHundredPacketsEach) {
  const auto c = preset("paper");
  EXPECT_EQ(burst_packets(c), 300);
  const auto b = with_bursts(c);
  ASSERT_EQ(b.env.scenario.bursts.size(), 3u);
  std::int64_t total = 0;
  for (const auto& x : b.env.scenario.bursts) total += x.packets;
  EXPECT_EQ(total, 900);
}

TEST(Scenarios, GapIsSymmetricAndKeepsMean) {
  auto c = preset("paper");
  const auto g = with_gap(c, 0.2);
  ASSERT_EQ(g.env.scenario.lambda_gap.size(), 3u);
  EXPECT_NEAR(g.env.scenario.lambda_gap[0], 1.9, 1e-12);
  EXPECT_NEAR(g.env.scenario.lambda_gap[1], 0.0, 1e-12);
  EXPECT_NEAR(g.env.scenario.lambda_gap[2], -1.9, 1e-12);
  EXPECT_THROW(default_policies("nope"), ConfigError);
}

TEST(Runner, ZeroTrafficIsFlaggedNotFabricated) {
  auto c = preset("desk");
  c.calibration.load_fraction = 0.0;
  c.env.traffic.lambda_per_slot = {0.0, 0.0};
  c.env.scenario.episode_slots = 30;
  c.run.eval_seeds = 2;
  InvariantReport report;
  const auto rows = evaluate(c, "max_sum_rate", nullptr, "t", "zero", report);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(report.ok());
  for (const auto& r : rows) {
    EXPECT_TRUE(r.delay_flagged);
    EXPECT_FALSE(r.average_delay_ms);
  }
}

TEST(Runner, PairedSeedsShareArrivalsAcrossPolicies) {
  auto c = preset("desk");
  c.calibration.load_fraction = 0.0;
  c.env.traffic.lambda_per_slot = {2.0, 2.0};
  c.env.scenario.episode_slots = 50;
  c.run.eval_seeds = 3;
  InvariantReport report;
  const auto a = evaluate(c, "random", nullptr, "t", "n", report);
  const auto b = evaluate(c, "max_sum_rate", nullptr, "t", "n", report);
  const auto n = evaluate(c, "no_ris", nullptr, "t", "n", report);
  EXPECT_TRUE(report.ok());
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].arrivals, b[i].arrivals);
    EXPECT_EQ(a[i].arrivals, n[i].arrivals);
    EXPECT_EQ(n[i].elements, 0);
  }
  // Rerun equality.
  const auto again = evaluate(c, "random", nullptr, "t", "n", report);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(again[i].average_delay_ms, a[i].average_delay_ms);
}
