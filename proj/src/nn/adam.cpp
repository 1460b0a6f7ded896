#include "risdelay/nn/adam.hpp"

#include <cmath>

#include "risdelay/common.hpp"
#include "risdelay/kernels.hpp"

namespace risdelay::nn {

AdamState::AdamState(std::size_t size, double learning_rate)
    : m(size, 0.0), v(size, 0.0), lr(learning_rate) {}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
  if (params.size() != grads.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
    throw InvalidInput("adam_step: parameter, gradient and moment sizes differ");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * grads[i];
    s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * grads[i] * grads[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    params[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

double clip_grad_norm(std::span<double> grads, double max_norm) {
  const double norm = std::sqrt(kernels::dot(grads.data(), grads.data(), grads.size()));
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace risdelay::nn
