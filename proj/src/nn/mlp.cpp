#include "risdelay/nn/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "risdelay/common.hpp"
#include "risdelay/kernels.hpp"

namespace risdelay::nn {
namespace {

void apply(Activation a, std::vector<double>& v) {
  switch (a) {
    case Activation::kLinear:
      break;
    case Activation::kTanh:
      for (double& x : v) x = std::tanh(x);
      break;
    case Activation::kRelu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
  }
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kLinear:
      return "linear";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "linear";
}

Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw InvalidInput("unknown activation '" + s + "'");
}

Mlp::Mlp(std::vector<int> sizes, std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2 || activations_.size() + 1 != sizes_.size()) {
    throw InvalidInput("Mlp: need at least two sizes and one activation per layer");
  }
  for (int s : sizes_) {
    if (s < 1) throw InvalidInput("Mlp: layer sizes must be >= 1");
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[i + 1]) * (sizes_[i] + 1);
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::make(int in, const std::vector<int>& hidden, int out, Activation hidden_act) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  std::vector<Activation> acts(hidden.size(), hidden_act);
  acts.push_back(Activation::kLinear);
  return Mlp(std::move(sizes), std::move(acts));
}

void Mlp::init(Rng& rng, double output_gain) {
  for (int layer = 0; layer < layer_count(); ++layer) {
    const int in = sizes_[layer];
    const int out = sizes_[layer + 1];
    double bound = std::sqrt(6.0 / (in + out));
    if (layer + 1 == layer_count()) bound *= output_gain;
    std::uniform_real_distribution<double> dist(-bound, bound);
    double* w = params_.data() + weight_offset(layer);
    for (std::size_t i = 0; i < static_cast<std::size_t>(in) * out; ++i) w[i] = dist(rng);
    std::fill_n(params_.data() + bias_offset(layer), out, 0.0);
  }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw InvalidInput("Mlp::forward: input has " + std::to_string(x.size()) + " entries, expected " +
                       std::to_string(input_size()));
  }
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (int layer = 0; layer < layer_count(); ++layer) {
    next.resize(sizes_[layer + 1]);
    kernels::gemv(params_.data() + weight_offset(layer), cur.data(),
                  params_.data() + bias_offset(layer), next.data(), sizes_[layer + 1],
                  sizes_[layer]);
    apply(activations_[layer], next);
    cur.swap(next);
  }
  return cur;
}

std::vector<double> Mlp::forward(std::span<const double> x, Tape& tape) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw InvalidInput("Mlp::forward: input has " + std::to_string(x.size()) + " entries, expected " +
                       std::to_string(input_size()));
  }
  tape.values.resize(layer_count() + 1);
  tape.values[0].assign(x.begin(), x.end());
  for (int layer = 0; layer < layer_count(); ++layer) {
    auto& out = tape.values[layer + 1];
    out.resize(sizes_[layer + 1]);
    kernels::gemv(params_.data() + weight_offset(layer), tape.values[layer].data(),
                  params_.data() + bias_offset(layer), out.data(), sizes_[layer + 1],
                  sizes_[layer]);
    apply(activations_[layer], out);
  }
  return tape.values.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> grad_output,
                   std::span<double> grad_params, std::vector<double>* grad_input) const {
  if (static_cast<int>(grad_output.size()) != output_size() || grad_params.size() != params_.size()) {
    throw InvalidInput("Mlp::backward: gradient shapes do not match the network");
  }
  std::vector<double> g(grad_output.begin(), grad_output.end());
  std::vector<double> prev;
  for (int layer = layer_count() - 1; layer >= 0; --layer) {
    const auto& y = tape.values[layer + 1];
    switch (activations_[layer]) {
      case Activation::kLinear:
        break;
      case Activation::kTanh:
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - y[i] * y[i];
        break;
      case Activation::kRelu:
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = y[i] > 0.0 ? g[i] : 0.0;
        break;
    }
    const int in = sizes_[layer];
    const int out = sizes_[layer + 1];
    kernels::rank1_acc(grad_params.data() + weight_offset(layer), g.data(),
                       tape.values[layer].data(), out, in);
    double* gb = grad_params.data() + bias_offset(layer);
    for (int i = 0; i < out; ++i) gb[i] += g[i];
    if (layer > 0 || grad_input != nullptr) {
      prev.assign(in, 0.0);
      kernels::gemv_t_acc(params_.data() + weight_offset(layer), g.data(), prev.data(), out, in);
      g.swap(prev);
    }
  }
  if (grad_input != nullptr) *grad_input = std::move(g);
}

}  // namespace risdelay::nn
