#include "spikepool/mjop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikepool {

namespace {

double apply_join(JoinOp op, double a, double b) {
  switch (op) {
    case JoinOp::Add:
      return a + b;
    case JoinOp::Max:
      return std::max(a, b);
    case JoinOp::Min:
      return std::min(a, b);
  }
  return a;
}

}  // namespace

McTree::McTree(std::vector<Compartment> compartments, JoinOp join,
               IfNeuron soma)
    : comps_(std::move(compartments)), join_(join), soma_(soma) {
  const std::size_t n = comps_.size();
  if (n == 0) {
    throw std::invalid_argument("McTree: tree must have at least one compartment");
  }
  if (n > kMaxCompartments) {
    throw std::invalid_argument("McTree: tree exceeds 1024 compartments (one Neuro-Core)");
  }
  children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    if (!(comps_[i].decay >= 0.0 && comps_[i].decay <= 1.0)) {
      throw std::invalid_argument("McTree: decay must lie in [0, 1]");
    }
    const int p = comps_[i].parent;
    if (p < 0) {
      if (root_ >= 0) {
        throw std::invalid_argument("McTree: more than one root compartment");
      }
      root_ = static_cast<int>(i);
      continue;
    }
    if (static_cast<std::size_t>(p) >= n || static_cast<std::size_t>(p) == i) {
      throw std::invalid_argument("McTree: parent index out of range");
    }
    children_[p].push_back(static_cast<int>(i));
    if (children_[p].size() > 2) {
      throw std::invalid_argument("McTree: a compartment may have at most two children");
    }
  }
  if (root_ < 0) {
    throw std::invalid_argument("McTree: no root compartment (cycle through every node)");
  }
  // BFS from the root; reversing the visit order puts children before
  // parents. Any node not reached sits on a cycle.
  eval_order_.clear();
  eval_order_.reserve(n);
  eval_order_.push_back(root_);
  for (std::size_t head = 0; head < eval_order_.size(); ++head) {
    for (int ch : children_[eval_order_[head]]) eval_order_.push_back(ch);
  }
  if (eval_order_.size() != n) {
    throw std::invalid_argument("McTree: disconnected compartments (parent cycle)");
  }
  std::reverse(eval_order_.begin(), eval_order_.end());
  out_.assign(n, 0.0);
}

McTree McTree::chain(std::size_t length, JoinOp join, IfNeuron soma) {
  if (length == 0) {
    throw std::invalid_argument("McTree::chain: length must be >= 1");
  }
  std::vector<Compartment> comps(length);
  for (std::size_t i = 0; i < length; ++i) {
    comps[i].parent = (i == 0) ? -1 : static_cast<int>(i) - 1;
  }
  return McTree(std::move(comps), join, soma);
}

McStepResult McTree::step(std::span<const double> injected,
                          const TimeBase& tb) {
  if (injected.size() != comps_.size()) {
    throw std::invalid_argument("McTree::step: one injected current per compartment required");
  }
  for (int idx : eval_order_) {
    Compartment& c = comps_[static_cast<std::size_t>(idx)];
    // Post-synaptic currents are non-negative; negative injections are
    // clamped before the join.
    double joined = std::max(injected[static_cast<std::size_t>(idx)], 0.0) + c.bias;
    for (int ch : children_[static_cast<std::size_t>(idx)]) {
      joined = apply_join(join_, joined, out_[static_cast<std::size_t>(ch)]);
    }
    if (idx == root_) {
      out_[static_cast<std::size_t>(idx)] = joined;
      continue;  // the soma integrates below, under the IF rule
    }
    c.v = c.v * (1.0 - c.decay) + joined;
    out_[static_cast<std::size_t>(idx)] =
        (c.forward == Forward::Current) ? joined : c.v;
  }

  McStepResult res;
  res.soma_dv = out_[static_cast<std::size_t>(root_)];
  Compartment& root = comps_[static_cast<std::size_t>(root_)];
  soma_.voltage *= (1.0 - root.decay);
  res.spike = step_if_neuron(soma_, res.soma_dv, tb);
  root.v = soma_.voltage;
  return res;
}

void McTree::reset() {
  for (Compartment& c : comps_) c.v = 0.0;
  soma_.voltage = 0.0;
  std::fill(out_.begin(), out_.end(), 0.0);
}

McStepResult step_mc_tree(McTree& tree, std::span<const double> injected,
                          const TimeBase& tb) {
  return tree.step(injected, tb);
}

MjopNet::MjopNet(std::size_t window_size, const MjopNetConfig& cfg, double dt)
    : cfg_(cfg),
      dt_(dt),
      tree_(McTree::chain(window_size, JoinOp::Max,
                          IfNeuron{cfg.soma_gain > 0.0 ? cfg.soma_gain : 1.0 / dt,
                                   cfg.soma_bias, 1.0, 0.0})),
      out_(cfg.output_filter, dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("MjopNet: dt must be positive");
  if (!(cfg.soma_decay >= 0.0 && cfg.soma_decay <= 1.0)) {
    throw std::invalid_argument("MjopNet: soma_decay must lie in [0, 1]");
  }
  tree_.compartment(0).decay = cfg.soma_decay;  // soma leak rides on the root
  in_.reserve(window_size);
  for (std::size_t i = 0; i < window_size; ++i) {
    in_.emplace_back(cfg.input_filter, dt);
  }
  currents_.assign(window_size, 0.0);
}

double MjopNet::step(std::span<const double> input_spikes) {
  if (input_spikes.size() != in_.size()) {
    throw std::invalid_argument("MjopNet::step: input count mismatch");
  }
  for (std::size_t i = 0; i < in_.size(); ++i) {
    currents_[i] = in_[i].step(input_spikes[i]);
  }
  TimeBase tb{dt_, 1};
  McStepResult r = tree_.step(currents_, tb);
  last_dv_ = r.soma_dv;
  return cfg_.scale * out_.step(r.spike);
}

void MjopNet::reset() {
  tree_.reset();
  for (LowPass& f : in_) f.reset();
  out_.reset();
  std::fill(currents_.begin(), currents_.end(), 0.0);
  last_dv_ = 0.0;
}

CurrentTrace run_mjop_net(MjopNet& net, const std::vector<SpikeTrain>& inputs,
                          const TimeBase& tb) {
  tb.validate();
  if (inputs.size() != net.window_size()) {
    throw std::invalid_argument("run_mjop_net: expected one spike train per compartment");
  }
  for (const SpikeTrain& t : inputs) {
    if (t.size() != tb.n_steps) {
      throw std::invalid_argument("run_mjop_net: spike train length mismatch");
    }
  }
  CurrentTrace out;
  out.values.reserve(tb.n_steps);
  std::vector<double> spikes(inputs.size(), 0.0);
  for (std::size_t t = 0; t < tb.n_steps; ++t) {
    for (std::size_t i = 0; i < inputs.size(); ++i) spikes[i] = inputs[i][t];
    out.values.push_back(net.step(spikes));
  }
  return out;
}

std::size_t mjop_tree_size(std::size_t window_rows, std::size_t window_cols) {
  if (window_rows == 0 || window_cols == 0) {
    throw std::invalid_argument("mjop_tree_size: window dimensions must be >= 1");
  }
  return window_rows * window_cols;
}

Matrix quantize_weights(const Matrix& weights, int bits) {
  if (bits < 2 || bits > 16) {
    throw std::invalid_argument("quantize_weights: bits must lie in [2, 16]");
  }
  double max_abs = 0.0;
  for (double w : weights.data) max_abs = std::max(max_abs, std::fabs(w));
  if (max_abs == 0.0) return weights;

  const double levels = std::ldexp(1.0, bits);  // 2^bits
  const double step = 2.0 * max_abs / (levels - 1.0);
  Matrix q = weights;
  for (double& w : q.data) {
    double idx = std::round((w + max_abs) / step);
    idx = std::clamp(idx, 0.0, levels - 1.0);
    w = -max_abs + idx * step;
  }
  return q;
}

}  // namespace spikepool
