#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "risdelay/channel.hpp"
#include "risdelay/common.hpp"

using namespace risdelay;
using namespace risdelay::channel;

namespace {

ChannelRealization random_realization(std::mt19937_64& rng, int K, int M, int Nt, int l0, int l1, int l2) {
  std::normal_distribution<double> d;
  ChannelRealization r(K, M, Nt, l0, l1, l2);
  for (auto* v : {&r.direct_taps, &r.bs_ris_taps, &r.ris_user_taps}) {
    for (auto& x : *v) x = {d(rng), d(rng)};
  }
  return r;
}

LinkGeometry default_geometry(int K, std::uint64_t seed) {
  GeometryConfig g;
  Rng rng(seed);
  return make_geometry(g, sample_user_positions(g, K, rng));
}

}  // namespace

TEST(PathLoss, ReferenceValues) {
  FadingConfig cfg;
  EXPECT_NEAR(path_loss(1.0, 3.8, cfg), 1e-3, 1e-15);
  EXPECT_NEAR(path_loss(5.0, 0.0, cfg), 1e-3, 1e-15);
  EXPECT_NEAR(path_loss(10.0, 2.0, cfg), 1e-5, 1e-17);
  EXPECT_THROW(path_loss(0.0, 2.0, cfg), InvalidInput);
  EXPECT_THROW(path_loss(-1.0, 2.0, cfg), InvalidInput);
}

TEST(Geometry, UsersLieInAnnularSector) {
  GeometryConfig g;
  Rng rng(5);
  const auto users = sample_user_positions(g, 500, rng);
  const Point ris{g.bs_ris_horizontal_m, g.bs_ris_vertical_m};
  for (const auto& u : users) {
    const double r = distance(u, ris);
    EXPECT_GE(r, g.annulus_inner_m - 1e-9);
    EXPECT_LE(r, g.annulus_outer_m + 1e-9);
    double deg = std::atan2(u.y - ris.y, u.x - ris.x) * 180.0 / std::numbers::pi;
    if (deg < 0) deg += 360.0;
    EXPECT_GE(deg, g.sector_start_deg - 1e-9);
    EXPECT_LE(deg, g.sector_start_deg + g.sector_width_deg + 1e-9);
  }
}

TEST(Cascade, SingleTapRisUserIsScaledBsRisTaps) {
  std::mt19937_64 rng(1);
  const auto r = random_realization(rng, 2, 3, 2, 1, 3, 1);
  const auto c = compose_cascaded_taps(r);
  ASSERT_EQ(c.taps, 3);
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < 3; ++m)
        for (int t = 0; t < 2; ++t) {
          EXPECT_LT(std::abs(c.at(l, k, m, t) - r.ris_user(0, k, m) * r.bs_ris(l, m, t)), 1e-15);
        }
}

TEST(Cascade, ZeroBsRisGivesZero) {
  std::mt19937_64 rng(2);
  auto r = random_realization(rng, 2, 3, 2, 2, 2, 3);
  for (auto& x : r.bs_ris_taps) x = 0.0;
  for (const auto& v : compose_cascaded_taps(r).values) EXPECT_EQ(v, Complex(0.0));
}

TEST(Cascade, MatchesConvolutionOracle) {
  std::mt19937_64 rng(3);
  const auto r = random_realization(rng, 2, 2, 2, 1, 2, 3);
  const auto c = compose_cascaded_taps(r);
  const auto ref = oracle::cascade(r);
  ASSERT_EQ(c.values.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_LT(std::abs(c.values[i] - ref[i]), 1e-12);
}

TEST(Dft, DeltaAtOriginIsFlat) {
  ChannelRealization r(1, 0, 2, 3, 1, 1);
  r.direct(0, 0, 0) = {0.3, -0.2};
  r.direct(0, 0, 1) = {1.0, 0.5};
  const auto f = to_frequency(r, 8);
  for (int n = 0; n < 8; ++n) {
    EXPECT_LT(std::abs(f.direct_at(0, n, 0) - Complex(0.3, -0.2)), 1e-15);
    EXPECT_LT(std::abs(f.direct_at(0, n, 1) - Complex(1.0, 0.5)), 1e-15);
  }
}

TEST(Dft, UnitDelayIsPhaseRamp) {
  ChannelRealization r(1, 0, 1, 2, 1, 1);
  r.direct(1, 0, 0) = 1.0;
  const int N = 16;
  const auto f = to_frequency(r, N);
  for (int n = 0; n < N; ++n) {
    const Complex want = std::exp(Complex(0.0, -2.0 * std::numbers::pi * n / N));
    EXPECT_LT(std::abs(f.direct_at(0, n, 0) - want), 1e-14);
  }
}

TEST(Dft, RejectsTooFewSubcarriers) {
  std::mt19937_64 rng(4);
  const auto r = random_realization(rng, 1, 2, 1, 4, 2, 3);
  EXPECT_THROW(to_frequency(r, 3), InvalidInput);
  EXPECT_NO_THROW(to_frequency(r, 4));
}

TEST(Dft, MatchesNaiveOracleAndProductForm) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto r = random_realization(rng, 2, 3, 2, 4, 2, 3);
    const int N = 8;
    const auto f = to_frequency(r, N);
    const auto ref = oracle::naive_frequency(r, N);
    const auto prod = oracle::cascaded_by_product(r, N);
    for (std::size_t i = 0; i < ref.direct.size(); ++i) EXPECT_LT(std::abs(f.direct[i] - ref.direct[i]), 1e-10);
    for (std::size_t i = 0; i < ref.cascaded.size(); ++i) {
      EXPECT_LT(std::abs(f.cascaded[i] - ref.cascaded[i]), 1e-10);
      EXPECT_LT(std::abs(f.cascaded[i] - prod[i]), 1e-10);
    }
  }
}

TEST(Dft, Linearity) {
  std::mt19937_64 rng(6);
  const auto x = random_realization(rng, 2, 2, 2, 3, 2, 2);
  const auto y = random_realization(rng, 2, 2, 2, 3, 2, 2);
  const double a = 0.7, b = -1.3;
  ChannelRealization z = x;
  for (std::size_t i = 0; i < z.direct_taps.size(); ++i) z.direct_taps[i] = a * x.direct_taps[i] + b * y.direct_taps[i];
  // The cascaded response is bilinear, so only the direct link is linear in the taps.
  const auto fx = to_frequency(x, 4), fy = to_frequency(y, 4), fz = to_frequency(z, 4);
  for (std::size_t i = 0; i < fz.direct.size(); ++i) {
    EXPECT_LT(std::abs(fz.direct[i] - (a * fx.direct[i] + b * fy.direct[i])), 1e-10);
  }
}

TEST(EffectiveChannel, NoRisEqualsDirect) {
  std::mt19937_64 rng(7);
  const auto f = to_frequency(random_realization(rng, 2, 0, 2, 2, 1, 1), 4);
  const auto eff = effective_channel(f, {});
  for (std::size_t i = 0; i < f.direct.size(); ++i) EXPECT_EQ(eff.values[i], f.direct[i]);
}

TEST(EffectiveChannel, MatchesElementwiseSum) {
  std::mt19937_64 rng(8);
  const auto f = to_frequency(random_realization(rng, 2, 5, 3, 2, 2, 2), 4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> phases(5);
  for (auto& p : phases) p = u(rng);
  const auto eff = effective_channel(f, phases);
  for (int k = 0; k < 2; ++k)
    for (int n = 0; n < 4; ++n)
      for (int t = 0; t < 3; ++t) {
        Complex want = f.direct[(k * 4 + n) * 3 + t];
        for (int m = 0; m < 5; ++m) want += std::polar(1.0, phases[m]) * f.cascaded_at(k, n, m, t);
        EXPECT_LT(std::abs(eff.row(k, n)[t] - want), 1e-12);
      }
  const auto zero = effective_channel(f, std::vector<double>(5, 0.0));
  for (int k = 0; k < 2; ++k) {
    Complex want = f.direct[(k * 4 + 1) * 3 + 2];
    for (int m = 0; m < 5; ++m) want += f.cascaded_at(k, 1, m, 2);
    EXPECT_LT(std::abs(zero.row(k, 1)[2] - want), 1e-12);
  }
  EXPECT_THROW(effective_channel(f, std::vector<double>(4, 0.0)), InvalidInput);
}

TEST(SampleChannel, DeterministicForSeed) {
  const auto geom = default_geometry(2, 9);
  FadingConfig cfg;
  Dims dims{2, 8, 4, 2};
  Rng a(42), b(42);
  const auto x = sample_channel(geom, cfg, dims, a);
  const auto y = sample_channel(geom, cfg, dims, b);
  EXPECT_EQ(x.direct_taps, y.direct_taps);
  EXPECT_EQ(x.bs_ris_taps, y.bs_ris_taps);
  EXPECT_EQ(x.ris_user_taps, y.ris_user_taps);
}

TEST(SampleChannel, PureLosLimitHasNoScatteredTaps) {
  const auto geom = default_geometry(2, 10);
  FadingConfig cfg;
  cfg.k_bs_ris_db = std::numeric_limits<double>::infinity();
  Dims dims{2, 8, 4, 2};
  Rng rng(1);
  const auto r = sample_channel(geom, cfg, dims, rng);
  for (int l = 1; l < cfg.taps_bs_ris; ++l)
    for (int m = 0; m < 4; ++m)
      for (int t = 0; t < 2; ++t) EXPECT_EQ(r.bs_ris(l, m, t), Complex(0.0));
}

TEST(SampleChannel, TapPowerMatchesPathLossAndRicianRatio) {
  const auto geom = default_geometry(1, 11);
  FadingConfig cfg;
  Dims dims{1, 8, 2, 1};
  Rng rng(77);
  const int draws = 100000;
  double direct = 0.0, br_los = 0.0, br_nlos = 0.0, ru_los = 0.0, ru_nlos = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto r = sample_channel(geom, cfg, dims, rng);
    for (int l = 0; l < cfg.taps_direct; ++l) direct += std::norm(r.direct(l, 0, 0));
    br_los += std::norm(r.bs_ris(0, 0, 0));
    for (int l = 1; l < cfg.taps_bs_ris; ++l) br_nlos += std::norm(r.bs_ris(l, 0, 0));
    ru_los += std::norm(r.ris_user(0, 0, 0));
    for (int l = 1; l < cfg.taps_ris_user; ++l) ru_nlos += std::norm(r.ris_user(l, 0, 0));
  }
  const double pd = path_loss(geom.bs_user_distance(0), cfg.xi_direct, cfg);
  const double pbr = path_loss(geom.bs_ris_distance(), cfg.xi_bs_ris, cfg);
  const double pru = path_loss(geom.ris_user_distance(0), cfg.xi_ris_user, cfg);
  EXPECT_NEAR(direct / draws / pd, 1.0, 0.02);
  EXPECT_NEAR((br_los + br_nlos) / draws / pbr, 1.0, 0.02);
  EXPECT_NEAR((ru_los + ru_nlos) / draws / pru, 1.0, 0.02);
  EXPECT_NEAR(br_los / br_nlos / db_to_linear(cfg.k_bs_ris_db), 1.0, 0.03);
  EXPECT_NEAR(ru_los / ru_nlos / db_to_linear(cfg.k_ris_user_db), 1.0, 0.03);
}

TEST(Phases, CanonicalRange) {
  for (double x : {-1e3, -kTwoPi, -1e-300, 0.0, 1.0, kTwoPi, kTwoPi - 1e-16, 7.0, 1e6}) {
    const double p = canonical_phase(x);
    EXPECT_GE(p, 0.0);
    EXPECT_LT(p, kTwoPi);
  }
}
