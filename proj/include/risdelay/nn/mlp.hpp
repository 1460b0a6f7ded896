#pragma once

// Dense feed-forward network over a single flat parameter vector.
//
// Parameter layout, per layer in order: weights (out x in, row-major), then
// bias (out). Gradients use the same layout so optimizers and archives can
// treat parameters as one contiguous block.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "risdelay/rng.hpp"

namespace risdelay::nn {

enum class Activation { kLinear, kTanh, kRelu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Per-sample intermediate values needed by backward().
struct Tape {
  std::vector<std::vector<double>> values;  // values[0] = input, values[i+1] = layer i output
};

class Mlp {
 public:
  Mlp() = default;
  // sizes = {in, hidden..., out}; one activation per layer.
  Mlp(std::vector<int> sizes, std::vector<Activation> activations);
  // Hidden layers use `hidden`, the final layer is linear.
  static Mlp make(int in, const std::vector<int>& hidden, int out,
                  Activation hidden_act = Activation::kTanh);

  // Xavier-uniform weights, zero biases; the last layer's weights are
  // multiplied by output_gain.
  void init(Rng& rng, double output_gain = 1.0);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(activations_.size()); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }

  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const {
    return offsets_[layer] + static_cast<std::size_t>(sizes_[layer + 1]) * sizes_[layer];
  }

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, Tape& tape) const;

  // Accumulates dL/dparams into grad_params given dL/doutput. When
  // grad_input is non-null it receives dL/dinput.
  void backward(const Tape& tape, std::span<const double> grad_output,
                std::span<double> grad_params, std::vector<double>* grad_input = nullptr) const;

 private:
  std::vector<int> sizes_;
  std::vector<Activation> activations_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

}  // namespace risdelay::nn
