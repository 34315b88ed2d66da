#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spikepool/matrix.hpp"
#include "spikepool/pooling.hpp"
#include "spikepool/sim.hpp"

namespace spikepool {

/// Convolution weights indexed [ky][kx][c_in][c_out].
struct ConvKernel {
  std::size_t kh = 1, kw = 1, cin = 1, cout = 1;
  std::vector<double> w;

  double& at(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) {
    return w[((ky * kw + kx) * cin + ci) * cout + co];
  }
  double at(std::size_t ky, std::size_t kx, std::size_t ci, std::size_t co) const {
    return w[((ky * kw + kx) * cin + ci) * cout + co];
  }
  void validate() const;
};

enum class ConvPadding { None, Same };

struct ConvAsMatrix {
  Matrix weights;  // rows = out flat size, cols = in flat size
  TensorShape out_shape;
};

/// Lowers a convolution to an explicit linear map over the flattened input
/// (the output shape keeps the input's layout). Throws std::invalid_argument
/// when the shape arithmetic does not work out.
ConvAsMatrix conv_to_linear(const ConvKernel& kernel, const TensorShape& input,
                            std::size_t stride_y, std::size_t stride_x,
                            ConvPadding padding);

/// A weighted layer followed by a rectifying (IF) nonlinearity.
struct LinearLayer {
  std::string name;
  Matrix weights;
  TensorShape out_shape;
};

/// Pooling over the preceding layer's units.
struct PoolLayerSpec {
  PoolSpec spec;
};

/// Final weighted readout, no activation.
struct OutputLayer {
  std::string name;
  Matrix weights;
};

using Layer = std::variant<LinearLayer, PoolLayerSpec, OutputLayer>;

/// Feedforward graph: LINEAR / POOL layers ending in one OUTPUT layer.
/// firing_rate_scale is the sigma every rectified unit's firing rate is
/// scaled by; rate_cap_hz is the one-spike-per-step rate limit.
struct LayerGraph {
  TensorShape input_shape;
  std::vector<Layer> layers;
  double firing_rate_scale = 400.0;
  double rate_cap_hz = 1000.0;

  /// Shapes must chain, the first layer must be LINEAR, POOL must follow
  /// LINEAR, and exactly one OUTPUT must sit last. Throws
  /// std::invalid_argument naming the offending layer.
  void validate() const;
  std::size_t output_size() const;
};

/// ReLU-equivalent forward pass: the conversion oracle. LINEAR layers apply
/// rate = min(cap, max(0, sigma*x)) / sigma; POOL layers apply the exact
/// windowed max (or mean for Average); OUTPUT applies weights only.
std::vector<double> rate_forward(const LayerGraph& graph,
                                 std::span<const double> input);

struct SpikingResult {
  std::vector<double> scores;               // averaged over the last half
  std::vector<CurrentTrace> output_traces;  // per output unit, per step
};

/// Spiking inference: the input (normalized to [-1, 1]) drives the first
/// LINEAR layer's IF neurons directly; spikes propagate through per-layer
/// synapses, pooling runs via the chosen method, and the output layer's
/// filtered drive is averaged over the last half of the run.
SpikingResult spiking_forward(const LayerGraph& graph,
                              std::span<const double> input,
                              const TimeBase& tb, PoolMethod method,
                              const PoolParams& params = {});

/// Index of the largest score; ties resolve to the lowest index.
std::size_t argmax_class(std::span<const double> scores);

}  // namespace spikepool
