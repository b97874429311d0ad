#pragma once

#include <cstdint>
#include <vector>

#include "sparkmri/tensor.hpp"

namespace sparkmri {

/// Multi-channel n-D convolution layer (cross-correlation convention),
/// no bias term anywhere. `same_pad` zero-pads so output spatial dims equal
/// input dims (odd kernels); otherwise the convolution is valid and output
/// extents shrink by kernel-1.
struct ConvLayer {
  int in_ch = 0, out_ch = 0;
  std::vector<int> kernel;
  bool same_pad = true;
  RealTensor weights;  // (out_ch, in_ch, kernel...)

  std::int64_t kernel_volume() const {
    std::int64_t k = 1;
    for (int e : kernel) k *= e;
    return k;
  }
  std::int64_t fan_in() const { return in_ch * kernel_volume(); }
};

ConvLayer make_conv(int in_ch, int out_ch, std::vector<int> kernel, bool same_pad = true);

enum class Act { identity, relu, custom_nl };

/// Additive skip: a_src is added to layer dst's pre-activation
/// (src 0 denotes the network input). Endpoint shapes must match.
struct Skip {
  int src = 0;
  int dst = 0;
};

struct Network {
  std::vector<ConvLayer> layers;
  std::vector<Act> acts;  // activation applied after each layer
  std::vector<Skip> skips;

  int n_layers() const { return static_cast<int>(layers.size()); }
  void validate() const;
};

/// Seeded uniform init in +-sqrt(1/fan_in).
void init_network(Network& net, std::uint64_t seed);

RealTensor conv_forward(const ConvLayer& layer, const RealTensor& x);

double relu(double x);
double custom_nl(double x);
RealTensor relu(const RealTensor& x);
/// Eq-style band nonlinearity: x + relu((x-1)/2) + relu(-(x+1)/2);
/// identity on [-1, 1].
RealTensor custom_nl(const RealTensor& x);
RealTensor apply_act(Act a, const RealTensor& x);

/// Pre-activations (after skip addition) of every layer; a_k = act(z_k).
struct ForwardTrace {
  std::vector<RealTensor> z;  // size n_layers
};

RealTensor net_forward(const Network& net, const RealTensor& x);
ForwardTrace net_forward_trace(const Network& net, const RealTensor& x);
RealTensor trace_output(const Network& net, const ForwardTrace& trace);

struct Gradients {
  std::vector<RealTensor> dw;
  RealTensor dx;
};

/// Exact reverse-mode gradients of net_forward; loss_grad is dL/d(output).
Gradients net_backward(const Network& net, const RealTensor& x, const ForwardTrace& trace,
                       const RealTensor& loss_grad);

struct MseResult {
  double loss = 0.0;
  RealTensor grad;
};
MseResult mse_loss(const RealTensor& pred, const RealTensor& target);

struct AdamState {
  double lr = 2e-3, beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  std::int64_t t = 0;
  std::vector<RealTensor> m, v;
};

AdamState make_adam(const Network& net, double lr);

/// Standard bias-corrected ADAM update over the layer weights.
void adam_step(AdamState& state, Network& net, const std::vector<RealTensor>& grads);

}  // namespace sparkmri
