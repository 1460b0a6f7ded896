#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace risdelay::nn {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t size, double learning_rate);
};

// Bias-corrected Adam update; increments state.step.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

// Rescales grads in place so their l2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<double> grads, double max_norm);

}  // namespace risdelay::nn
