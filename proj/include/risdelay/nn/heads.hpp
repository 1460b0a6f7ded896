#pragma once

// Policy heads: a tanh-squashed diagonal Gaussian for RIS phases and a
// categorical distribution for subcarrier ownership.

#include <cstddef>
#include <span>
#include <vector>

#include "risdelay/rng.hpp"

namespace risdelay::nn {

inline constexpr double kLogStdMin = -6.907755278982137;  // log(1e-3)
inline constexpr double kLogStdMax = 0.6931471805599453;  // log(2)

double clamp_log_std(double raw);

// Squash u -> (tanh(u) + 1) * pi, mapping the real line onto (0, 2pi).
double squash(double u);

// log |d squash / du| = log(pi * (1 - tanh(u)^2)), evaluated without
// cancellation for large |u|.
double log_squash_jacobian(double u);

// Pre-squash sample u ~ N(mean, exp(log_std)^2) elementwise.
std::vector<double> gaussian_sample(std::span<const double> mean, std::span<const double> log_std,
                                    Rng& rng);

// log density of the squashed action a = squash(u), expressed through u:
// sum_i [log N(u_i; mean_i, std_i)] - sum_i log_squash_jacobian(u_i).
double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> u);

// Gradients of gaussian_log_prob w.r.t. mean and raw log_std (zero where the
// clamp is active), scaled by `scale` and accumulated.
void gaussian_log_prob_grad(std::span<const double> mean, std::span<const double> log_std,
                            std::span<const double> u, double scale, std::span<double> grad_mean,
                            std::span<double> grad_log_std);

// Entropy of the pre-squash Gaussian, sum_i (0.5 log(2 pi e) + log std_i).
double gaussian_entropy(std::span<const double> log_std);
void gaussian_entropy_grad(std::span<const double> log_std, double scale,
                           std::span<double> grad_log_std);

std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

double categorical_log_prob(std::span<const double> logits, int index);
int categorical_sample(std::span<const double> logits, Rng& rng);
int categorical_argmax(std::span<const double> logits);
double categorical_entropy(std::span<const double> logits);

// d log p(index) / d logits = onehot(index) - p, scaled and accumulated.
void categorical_log_prob_grad(std::span<const double> logits, int index, double scale,
                               std::span<double> grad_logits);
// dH/dz_j = -p_j (log p_j + H), scaled and accumulated.
void categorical_entropy_grad(std::span<const double> logits, double scale,
                              std::span<double> grad_logits);

}  // namespace risdelay::nn
