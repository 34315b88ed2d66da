#include "spikepool/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikepool {

void ConvKernel::validate() const {
  if (kh == 0 || kw == 0 || cin == 0 || cout == 0) {
    throw std::invalid_argument("ConvKernel: all dims must be >= 1");
  }
  if (w.size() != kh * kw * cin * cout) {
    throw std::invalid_argument("ConvKernel: weight count does not match dims");
  }
}

ConvAsMatrix conv_to_linear(const ConvKernel& kernel, const TensorShape& input,
                            std::size_t stride_y, std::size_t stride_x,
                            ConvPadding padding) {
  kernel.validate();
  input.validate();
  if (stride_y == 0 || stride_x == 0) {
    throw std::invalid_argument("conv_to_linear: strides must be >= 1");
  }
  if (kernel.cin != input.channels) {
    throw std::invalid_argument("conv_to_linear: kernel input channels do not match the tensor");
  }

  std::size_t out_h = 0, out_w = 0;
  std::size_t pad_top = 0, pad_left = 0;
  if (padding == ConvPadding::None) {
    if (kernel.kh > input.height || kernel.kw > input.width) {
      throw std::invalid_argument("conv_to_linear: kernel larger than input without padding");
    }
    out_h = (input.height - kernel.kh) / stride_y + 1;
    out_w = (input.width - kernel.kw) / stride_x + 1;
  } else {
    out_h = (input.height + stride_y - 1) / stride_y;
    out_w = (input.width + stride_x - 1) / stride_x;
    const std::size_t need_h = (out_h - 1) * stride_y + kernel.kh;
    const std::size_t need_w = (out_w - 1) * stride_x + kernel.kw;
    pad_top = (need_h > input.height) ? (need_h - input.height) / 2 : 0;
    pad_left = (need_w > input.width) ? (need_w - input.width) / 2 : 0;
  }

  TensorShape out_shape{kernel.cout, out_h, out_w, input.layout};
  Matrix m(out_shape.flat_size(), input.flat_size());
  for (std::size_t co = 0; co < kernel.cout; ++co) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const std::size_t row = out_shape.index(co, oy, ox);
        for (std::size_t ky = 0; ky < kernel.kh; ++ky) {
          const long iy = static_cast<long>(oy * stride_y + ky) -
                          static_cast<long>(pad_top);
          if (iy < 0 || iy >= static_cast<long>(input.height)) continue;
          for (std::size_t kx = 0; kx < kernel.kw; ++kx) {
            const long ix = static_cast<long>(ox * stride_x + kx) -
                            static_cast<long>(pad_left);
            if (ix < 0 || ix >= static_cast<long>(input.width)) continue;
            for (std::size_t ci = 0; ci < kernel.cin; ++ci) {
              const std::size_t col = input.index(
                  ci, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
              m.at(row, col) += kernel.at(ky, kx, ci, co);
            }
          }
        }
      }
    }
  }
  return {std::move(m), out_shape};
}

namespace {

std::string layer_label(const Layer& layer, std::size_t index) {
  std::string kind;
  std::string name;
  if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
    kind = "linear";
    name = lin->name;
  } else if (std::holds_alternative<PoolLayerSpec>(layer)) {
    kind = "pool";
  } else {
    kind = "output";
    name = std::get<OutputLayer>(layer).name;
  }
  std::string label = "layer " + std::to_string(index) + " (" + kind;
  if (!name.empty()) label += " '" + name + "'";
  return label + ")";
}

}  // namespace

void LayerGraph::validate() const {
  input_shape.validate();
  if (layers.empty()) {
    throw std::invalid_argument("LayerGraph: at least an OUTPUT layer is required");
  }
  if (!std::holds_alternative<LinearLayer>(layers.front())) {
    throw std::invalid_argument("LayerGraph: the first layer must be LINEAR (the spike encoder)");
  }
  TensorShape shape = input_shape;
  bool prev_spiking = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& layer = layers[i];
    const bool last = (i + 1 == layers.size());
    if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
      if (last) {
        throw std::invalid_argument("LayerGraph: " + layer_label(layer, i) +
                                    " cannot be last; OUTPUT must close the graph");
      }
      if (lin->weights.cols != shape.flat_size()) {
        throw std::invalid_argument("LayerGraph: " + layer_label(layer, i) +
                                    " expects " + std::to_string(lin->weights.cols) +
                                    " inputs but receives " +
                                    std::to_string(shape.flat_size()));
      }
      if (lin->weights.rows != lin->out_shape.flat_size()) {
        throw std::invalid_argument("LayerGraph: " + layer_label(layer, i) +
                                    " weight rows do not match its output shape");
      }
      shape = lin->out_shape;
      prev_spiking = true;
    } else if (const auto* pool = std::get_if<PoolLayerSpec>(&layer)) {
      if (last) {
        throw std::invalid_argument("LayerGraph: " + layer_label(layer, i) +
                                    " cannot be last; OUTPUT must close the graph");
      }
      if (!prev_spiking) {
        throw std::invalid_argument("LayerGraph: " + layer_label(layer, i) +
                                    " must follow a LINEAR layer");
      }
      shape = pooled_shape(shape, pool->spec);  // validates divisibility
      prev_spiking = false;
    } else {
      const auto& out = std::get<OutputLayer>(layer);
      if (!last) {
        throw std::invalid_argument("LayerGraph: " + layer_label(layer, i) +
                                    " must be the final layer");
      }
      if (out.weights.cols != shape.flat_size()) {
        throw std::invalid_argument("LayerGraph: " + layer_label(layer, i) +
                                    " expects " + std::to_string(out.weights.cols) +
                                    " inputs but receives " +
                                    std::to_string(shape.flat_size()));
      }
    }
  }
  for (const Layer& layer : layers) {
    const Matrix* w = nullptr;
    if (const auto* lin = std::get_if<LinearLayer>(&layer)) w = &lin->weights;
    if (const auto* out = std::get_if<OutputLayer>(&layer)) w = &out->weights;
    if (w) {
      for (double v : w->data) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("LayerGraph: non-finite weight entries");
        }
      }
    }
  }
}

std::size_t LayerGraph::output_size() const {
  return std::get<OutputLayer>(layers.back()).weights.rows;
}

std::vector<double> rate_forward(const LayerGraph& graph,
                                 std::span<const double> input) {
  graph.validate();
  if (input.size() != graph.input_shape.flat_size()) {
    throw std::invalid_argument("rate_forward: input size does not match the graph");
  }
  const double cap = graph.rate_cap_hz / graph.firing_rate_scale;
  std::vector<double> x(input.begin(), input.end());
  TensorShape shape = graph.input_shape;
  for (const Layer& layer : graph.layers) {
    if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
      x = matvec(lin->weights, x);
      for (double& v : x) v = std::clamp(v, 0.0, cap);
      shape = lin->out_shape;
    } else if (const auto* pool = std::get_if<PoolLayerSpec>(&layer)) {
      const auto groups = extract_windows(shape, pool->spec);
      const TensorShape out = pooled_shape(shape, pool->spec);
      std::vector<double> pooled(out.flat_size(), 0.0);
      const bool average = (pool->spec.method == PoolMethod::Average);
      for (const WindowGroup& g : groups) {
        if (average) {
          double sum = 0.0;
          for (std::size_t idx : g.input_indices) sum += x[idx];
          pooled[g.pooled_index] = sum / static_cast<double>(g.input_indices.size());
        } else {
          double m = x[g.input_indices.front()];
          for (std::size_t idx : g.input_indices) m = std::max(m, x[idx]);
          pooled[g.pooled_index] = m;
        }
      }
      x = std::move(pooled);
      shape = out;
    } else {
      x = matvec(std::get<OutputLayer>(layer).weights, x);
    }
  }
  return x;
}

SpikingResult spiking_forward(const LayerGraph& graph,
                              std::span<const double> input,
                              const TimeBase& tb, PoolMethod method,
                              const PoolParams& params) {
  graph.validate();
  tb.validate();
  if (input.size() != graph.input_shape.flat_size()) {
    throw std::invalid_argument("spiking_forward: input size does not match the graph");
  }

  struct LinearState {
    const Matrix* weights = nullptr;
    std::vector<IfNeuron> neurons;
    std::vector<LowPass> synapse;  // filters this layer's spikes for the next
    std::vector<double> spikes;
    std::vector<double> currents;
  };
  struct PoolState {
    std::unique_ptr<PoolLayer> layer;
    std::vector<double> currents;
  };
  struct OutputState {
    const Matrix* weights = nullptr;
  };

  const double sigma = graph.firing_rate_scale;
  const double amplitude = 1.0 / (sigma * tb.dt);
  const SynapseFilter inter_layer{params.input_filter};

  std::vector<std::variant<LinearState, PoolState, OutputState>> states;
  states.reserve(graph.layers.size());
  TensorShape shape = graph.input_shape;
  for (const Layer& layer : graph.layers) {
    if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
      LinearState st;
      st.weights = &lin->weights;
      st.neurons.assign(lin->weights.rows, IfNeuron{sigma, 0.0, amplitude, 0.0});
      st.synapse.assign(lin->weights.rows, LowPass(inter_layer, tb.dt));
      st.spikes.assign(lin->weights.rows, 0.0);
      st.currents.assign(lin->weights.rows, 0.0);
      states.emplace_back(std::move(st));
      shape = lin->out_shape;
    } else if (const auto* pool = std::get_if<PoolLayerSpec>(&layer)) {
      PoolState st;
      PoolSpec spec = pool->spec;
      spec.method = method;
      st.layer = std::make_unique<PoolLayer>(shape, spec, params, tb.dt);
      shape = st.layer->out_shape();
      st.currents.assign(shape.flat_size(), 0.0);
      states.emplace_back(std::move(st));
    } else {
      states.emplace_back(OutputState{&std::get<OutputLayer>(layer).weights});
    }
  }

  const std::size_t n_out = graph.output_size();
  SpikingResult result;
  result.output_traces.assign(n_out, {});
  for (CurrentTrace& t : result.output_traces) t.values.assign(tb.n_steps, 0.0);
  result.scores.assign(n_out, 0.0);

  std::vector<double> scores_t(n_out, 0.0);
  for (std::size_t t = 0; t < tb.n_steps; ++t) {
    // Within a step, layer l consumes layer l-1's output from this same
    // step; the first linear layer reads the constant input directly.
    std::span<const double> currents = input;
    std::span<const double> spikes;
    for (auto& state : states) {
      if (auto* lin = std::get_if<LinearState>(&state)) {
        const std::vector<double> drive = matvec(*lin->weights, currents);
        for (std::size_t i = 0; i < drive.size(); ++i) {
          lin->spikes[i] = step_if_neuron(lin->neurons[i], drive[i], tb);
          lin->currents[i] = lin->synapse[i].step(lin->spikes[i]);
        }
        currents = lin->currents;
        spikes = lin->spikes;
      } else if (auto* pool = std::get_if<PoolState>(&state)) {
        pool->layer->step(spikes, pool->currents);
        currents = pool->currents;
        spikes = {};
      } else {
        auto* out = std::get_if<OutputState>(&state);
        const std::vector<double> s = matvec(*out->weights, currents);
        for (std::size_t i = 0; i < n_out; ++i) scores_t[i] = s[i];
      }
    }
    for (std::size_t i = 0; i < n_out; ++i) {
      result.output_traces[i].values[t] = scores_t[i];
    }
  }

  const std::size_t begin = tb.n_steps / 2;
  const double denom = static_cast<double>(tb.n_steps - begin);
  for (std::size_t i = 0; i < n_out; ++i) {
    double sum = 0.0;
    for (std::size_t t = begin; t < tb.n_steps; ++t) {
      sum += result.output_traces[i].values[t];
    }
    result.scores[i] = sum / denom;
  }
  return result;
}

std::size_t argmax_class(std::span<const double> scores) {
  if (scores.empty()) {
    throw std::invalid_argument("argmax_class: scores must be non-empty");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace spikepool
