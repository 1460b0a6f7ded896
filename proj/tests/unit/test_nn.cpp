#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "risdelay/common.hpp"
#include "risdelay/nn/adam.hpp"
#include "risdelay/nn/archive.hpp"
#include "risdelay/nn/heads.hpp"
#include "risdelay/nn/mlp.hpp"

using namespace risdelay;
using namespace risdelay::nn;
namespace fs = std::filesystem;

namespace {

std::vector<double> randn(Rng& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

int act_code(Activation a) {
  switch (a) {
    case Activation::kTanh:
      return 1;
    case Activation::kRelu:
      return 2;
    default:
      return 0;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("risdelay_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Mlp, ForwardMatchesDenseOracle) {
  Rng rng(1);
  for (auto act : {Activation::kLinear, Activation::kTanh, Activation::kRelu}) {
    Mlp net({5, 7, 3, 2}, {act, act, Activation::kLinear});
    net.init(rng, 0.5);
    const auto x = randn(rng, 5);
    const auto y = net.forward(x);
    const auto o = oracle::dense_forward(net.sizes(), {act_code(act), act_code(act), 0}, net.params(), x);
    ASSERT_EQ(y.size(), o.size());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], o[i], 1e-12);
  }
}

TEST(Mlp, InitIsXavierWithZeroBias) {
  Rng rng(2);
  auto net = Mlp::make(10, {20}, 4);
  net.init(rng, 0.01);
  const double b0 = std::sqrt(6.0 / 30.0), b1 = 0.01 * std::sqrt(6.0 / 24.0);
  for (std::size_t i = 0; i < 200; ++i) EXPECT_LE(std::abs(net.params()[net.weight_offset(0) + i]), b0);
  for (std::size_t i = 0; i < 80; ++i) EXPECT_LE(std::abs(net.params()[net.weight_offset(1) + i]), b1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(net.params()[net.bias_offset(0) + i], 0.0);
  EXPECT_EQ(net.param_count(), 10u * 20 + 20 + 20 * 4 + 4);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto act = std::array{Activation::kTanh, Activation::kRelu, Activation::kLinear}[trial % 3];
    Mlp net({4, 6, 5, 3}, {act, Activation::kTanh, Activation::kLinear});
    net.init(rng);
    for (auto& p : net.params()) p += 0.05;
    const auto x = randn(rng, 4);
    const auto w = randn(rng, 3);
    Tape tape;
    net.forward(x, tape);
    std::vector<double> g(net.param_count(), 0.0), gx;
    net.backward(tape, w, g, &gx);

    const auto loss_p = [&](const std::vector<double>& p) {
      Mlp copy = net;
      copy.params() = p;
      return dot(copy.forward(x), w);
    };
    EXPECT_LT(oracle::relative_error(g, oracle::numeric_gradient(loss_p, net.params())), 1e-4);
    const auto loss_x = [&](const std::vector<double>& xi) { return dot(net.forward(xi), w); };
    EXPECT_LT(oracle::relative_error(gx, oracle::numeric_gradient(loss_x, x)), 1e-4);
  }
}

TEST(Mlp, BackwardAccumulates) {
  Rng rng(4);
  auto net = Mlp::make(3, {4}, 2);
  net.init(rng);
  const auto x = randn(rng, 3);
  Tape tape;
  net.forward(x, tape);
  std::vector<double> once(net.param_count(), 0.0), twice(net.param_count(), 0.0);
  const std::vector<double> w{1.0, -2.0};
  net.backward(tape, w, once);
  net.backward(tape, w, twice);
  net.backward(tape, w, twice);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice[i], 2.0 * once[i], 1e-14);
}

TEST(Activation, StringRoundTrip) {
  for (auto a : {Activation::kLinear, Activation::kTanh, Activation::kRelu}) {
    EXPECT_EQ(activation_from_string(to_string(a)), a);
  }
  EXPECT_THROW(activation_from_string("gelu"), InvalidInput);
}

TEST(GaussianHead, SquashRangeAndJacobian) {
  EXPECT_NEAR(squash(0.0), std::numbers::pi, 1e-15);
  for (double u : {-30.0, -3.0, -0.2, 0.0, 0.9, 4.0, 30.0}) {
    const double a = squash(u);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, kTwoPi);
    if (std::abs(u) < 5.0) {
      const double t = std::tanh(u);
      EXPECT_NEAR(log_squash_jacobian(u), std::log(std::numbers::pi * (1.0 - t * t)), 1e-12);
    }
    EXPECT_TRUE(std::isfinite(log_squash_jacobian(u)));
  }
  EXPECT_NEAR(log_squash_jacobian(400.0), std::log(4.0 * std::numbers::pi) - 800.0, 1e-9);
}

TEST(GaussianHead, LogProbMatchesDensity) {
  const std::vector<double> mean{0.3}, ls{std::log(0.7)}, u{-0.1};
  const double z = (-0.1 - 0.3) / 0.7;
  const double t = std::tanh(-0.1);
  const double expected = -0.5 * z * z - std::log(0.7) - 0.5 * std::log(2.0 * std::numbers::pi) -
                          std::log(std::numbers::pi * (1.0 - t * t));
  EXPECT_NEAR(gaussian_log_prob(mean, ls, u), expected, 1e-12);
  EXPECT_NEAR(gaussian_entropy(ls), 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) + std::log(0.7),
              1e-12);
  EXPECT_EQ(clamp_log_std(-100.0), kLogStdMin);
  EXPECT_EQ(clamp_log_std(100.0), kLogStdMax);
}

TEST(GaussianHead, GradientsMatchFiniteDifferences) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mean = randn(rng, 4);
    auto ls = randn(rng, 4, 0.3);
    for (auto& v : ls) v -= 0.5;
    const auto u = randn(rng, 4);
    std::vector<double> gm(4, 0.0), gs(4, 0.0);
    gaussian_log_prob_grad(mean, ls, u, 1.0, gm, gs);
    const auto fm = [&](const std::vector<double>& m) { return gaussian_log_prob(m, ls, u); };
    const auto fs_ = [&](const std::vector<double>& s) { return gaussian_log_prob(mean, s, u); };
    EXPECT_LT(oracle::relative_error(gm, oracle::numeric_gradient(fm, mean)), 1e-4);
    EXPECT_LT(oracle::relative_error(gs, oracle::numeric_gradient(fs_, ls)), 1e-4);

    std::vector<double> ge(4, 0.0);
    gaussian_entropy_grad(ls, 1.0, ge);
    const auto fe = [&](const std::vector<double>& s) { return gaussian_entropy(s); };
    EXPECT_LT(oracle::relative_error(ge, oracle::numeric_gradient(fe, ls)), 1e-4);
  }
}

TEST(GaussianHead, SampleMoments) {
  Rng rng(6);
  const std::vector<double> mean{1.5}, ls{std::log(0.5)};
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = gaussian_sample(mean, ls, rng)[0];
    s += u;
    s2 += u * u;
  }
  const double m = s / n;
  EXPECT_NEAR(m, 1.5, 0.01);
  EXPECT_NEAR(std::sqrt(s2 / n - m * m), 0.5, 0.01);
}

TEST(CategoricalHead, SoftmaxStableAtExtremeLogits) {
  for (double scale : {1.0, 50.0, 500.0}) {
    const std::vector<double> z{scale, -scale, 0.0, 0.5 * scale};
    const auto p = softmax(z);
    const auto lp = log_softmax(z);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_TRUE(std::isfinite(lp[i]));
      EXPECT_NEAR(std::exp(lp[i]), p[i], 1e-15);
      sum += p[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_TRUE(std::isfinite(categorical_entropy(z)));
    EXPECT_EQ(categorical_argmax(z), 0);
  }
  EXPECT_NEAR(log_softmax(std::vector<double>{500.0, -500.0})[1], -1000.0, 1e-9);
}

TEST(CategoricalHead, GradientsMatchFiniteDifferences) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = randn(rng, 5, 2.0);
    const int idx = trial % 5;
    std::vector<double> g(5, 0.0), ge(5, 0.0);
    categorical_log_prob_grad(z, idx, 1.0, g);
    categorical_entropy_grad(z, 1.0, ge);
    const auto f = [&](const std::vector<double>& v) { return categorical_log_prob(v, idx); };
    const auto fe = [&](const std::vector<double>& v) { return categorical_entropy(v); };
    EXPECT_LT(oracle::relative_error(g, oracle::numeric_gradient(f, z)), 1e-4);
    EXPECT_LT(oracle::relative_error(ge, oracle::numeric_gradient(fe, z)), 1e-4);
  }
}

TEST(CategoricalHead, SampleFrequencies) {
  Rng rng(8);
  const std::vector<double> z{0.0, std::log(2.0), std::log(3.0)};
  std::vector<int> counts(3, 0);
  const int n = 120000;
  for (int i = 0; i < n; ++i) ++counts[categorical_sample(z, rng)];
  EXPECT_NEAR(counts[0] / double(n), 1.0 / 6.0, 0.005);
  EXPECT_NEAR(counts[1] / double(n), 2.0 / 6.0, 0.005);
  EXPECT_NEAR(counts[2] / double(n), 3.0 / 6.0, 0.005);
}

TEST(Adam, MatchesHandComputedSteps) {
  std::vector<double> p{1.0, -2.0};
  AdamState s(2, 0.1);
  const std::vector<double> g1{0.5, -1.0}, g2{0.1, 0.2};
  adam_step(p, g1, s);
  // First bias-corrected step moves each parameter by lr * sign(g).
  EXPECT_NEAR(p[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-12);
  EXPECT_NEAR(p[1], -2.0 + 0.1 * 1.0 / (1.0 + 1e-8), 1e-12);
  adam_step(p, g2, s);
  const double m = 0.9 * 0.05 + 0.1 * 0.1, v = 0.999 * 0.00025 + 0.001 * 0.01;
  const double m_hat = m / (1 - 0.81), v_hat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-12);
  EXPECT_EQ(s.step, 2);
  std::vector<double> bad(3);
  EXPECT_THROW(adam_step(p, bad, s), InvalidInput);
}

TEST(Adam, ClipGradNorm) {
  std::vector<double> g{3.0, 4.0};
  EXPECT_DOUBLE_EQ(clip_grad_norm(g, 1.0), 5.0);
  EXPECT_NEAR(g[0], 0.6, 1e-15);
  EXPECT_NEAR(g[1], 0.8, 1e-15);
  std::vector<double> small{0.1, 0.1};
  clip_grad_norm(small, 1.0);
  EXPECT_EQ(small[0], 0.1);
}

TEST(Archive, RoundTripAndHash) {
  const auto dir = scratch_dir("archive");
  Archive a;
  a.meta["note"] = "x";
  const std::vector<double> w{1.0, -0.0, 3.25, 1e-300}, b{};
  a.put("w", w);
  a.put("b", b);
  save_archive(dir / "ckpt", a);
  EXPECT_TRUE(archive_exists(dir / "ckpt"));
  const auto back = load_archive(dir / "ckpt");
  EXPECT_EQ(back.get("w"), w);
  EXPECT_TRUE(back.get("b").empty());
  EXPECT_EQ(back.meta["note"], "x");
  EXPECT_THROW(back.get("missing"), ConfigError);
  EXPECT_EQ(hash_hex(w), hash_hex(back.get("w")));
  EXPECT_NE(fnv1a(w), fnv1a(std::vector<double>{1.0, 0.0, 3.25, 1e-300}));
  // FNV-1a of no bytes is the offset basis.
  EXPECT_EQ(fnv1a(std::vector<double>{}), 14695981039346656037ull);
}

TEST(Archive, DetectsCorruptionAndTruncation) {
  const auto dir = scratch_dir("archive_bad");
  Archive a;
  a.put("w", std::vector<double>{1.0, 2.0, 3.0});
  save_archive(dir / "c", a);
  const auto bin = fs::path(dir / "c").concat(".bin");
  {
    std::fstream f(bin, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(3);
    f.put('\x7f');
  }
  EXPECT_THROW(load_archive(dir / "c"), ConfigError);
  save_archive(dir / "c", a);
  fs::resize_file(bin, fs::file_size(bin) - 8);
  EXPECT_THROW(load_archive(dir / "c"), ConfigError);
  EXPECT_THROW(load_archive(dir / "absent"), ConfigError);
  EXPECT_FALSE(archive_exists(dir / "absent"));
}
