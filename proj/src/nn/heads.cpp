#include "risdelay/nn/heads.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "risdelay/common.hpp"

namespace risdelay::nn {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 log(2 pi)

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void require_same(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidInput("policy head: mismatched vector lengths");
}

}  // namespace

double clamp_log_std(double raw) { return std::clamp(raw, kLogStdMin, kLogStdMax); }

double squash(double u) { return (std::tanh(u) + 1.0) * std::numbers::pi; }

double log_squash_jacobian(double u) {
  // 1 - tanh(u)^2 = 4 e^{-2|u|} / (1 + e^{-2|u|})^2
  const double a = std::abs(u);
  return std::log(std::numbers::pi) + 2.0 * (std::numbers::ln2 - a - softplus(-2.0 * a));
}

std::vector<double> gaussian_sample(std::span<const double> mean, std::span<const double> log_std,
                                    Rng& rng) {
  require_same(mean.size(), log_std.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(mean.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = mean[i] + std::exp(clamp_log_std(log_std[i])) * normal(rng);
  }
  return u;
}

double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> u) {
  require_same(mean.size(), log_std.size());
  require_same(mean.size(), u.size());
  double lp = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ls = clamp_log_std(log_std[i]);
    const double z = (u[i] - mean[i]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi - log_squash_jacobian(u[i]);
  }
  return lp;
}

void gaussian_log_prob_grad(std::span<const double> mean, std::span<const double> log_std,
                            std::span<const double> u, double scale, std::span<double> grad_mean,
                            std::span<double> grad_log_std) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const bool clamped = log_std[i] < kLogStdMin || log_std[i] > kLogStdMax;
    const double ls = clamp_log_std(log_std[i]);
    const double inv_var = std::exp(-2.0 * ls);
    const double diff = u[i] - mean[i];
    grad_mean[i] += scale * diff * inv_var;
    if (!clamped) grad_log_std[i] += scale * (diff * diff * inv_var - 1.0);
  }
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += 0.5 + kHalfLog2Pi + clamp_log_std(ls);
  return h;
}

void gaussian_entropy_grad(std::span<const double> log_std, double scale,
                           std::span<double> grad_log_std) {
  for (std::size_t i = 0; i < log_std.size(); ++i) {
    if (log_std[i] >= kLogStdMin && log_std[i] <= kLogStdMax) grad_log_std[i] += scale;
  }
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw InvalidInput("log_softmax: empty logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  auto p = log_softmax(logits);
  for (double& v : p) v = std::exp(v);
  return p;
}

double categorical_log_prob(std::span<const double> logits, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= logits.size()) {
    throw InvalidInput("categorical_log_prob: index out of range");
  }
  return log_softmax(logits)[index];
}

int categorical_sample(std::span<const double> logits, Rng& rng) {
  const auto p = softmax(logits);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (r < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

int categorical_argmax(std::span<const double> logits) {
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double categorical_entropy(std::span<const double> logits) {
  const auto lp = log_softmax(logits);
  double h = 0.0;
  for (double l : lp) h -= std::exp(l) * l;
  return h;
}

void categorical_log_prob_grad(std::span<const double> logits, int index, double scale,
                               std::span<double> grad_logits) {
  const auto p = softmax(logits);
  for (std::size_t i = 0; i < p.size(); ++i) {
    grad_logits[i] += scale * ((static_cast<int>(i) == index ? 1.0 : 0.0) - p[i]);
  }
}

void categorical_entropy_grad(std::span<const double> logits, double scale,
                              std::span<double> grad_logits) {
  const auto lp = log_softmax(logits);
  double h = 0.0;
  for (double l : lp) h -= std::exp(l) * l;
  for (std::size_t i = 0; i < lp.size(); ++i) {
    grad_logits[i] += scale * (-std::exp(lp[i]) * (lp[i] + h));
  }
}

}  // namespace risdelay::nn
