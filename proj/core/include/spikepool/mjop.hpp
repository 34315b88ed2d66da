#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spikepool/matrix.hpp"
#include "spikepool/sim.hpp"

namespace spikepool {

/// Combining rule applied where a compartment merges its own current with
/// its children's outputs. The pooling path only uses Max; Add and Min exist
/// for parity with the hardware model.
enum class JoinOp { Add, Max, Min };

/// Which state variable a compartment communicates to its parent.
enum class Forward { Current, Voltage };

/// One node of a multi-compartment neuron.
struct Compartment {
  double decay = 0.0;  // voltage leak in [0, 1]
  double bias = 0.0;   // added to the injected current before the join
  Forward forward = Forward::Current;
  int parent = -1;  // -1 marks the root (soma)
  double v = 0.0;   // compartment voltage, updated every step
};

struct McStepResult {
  double soma_dv = 0.0;  // join result that drives the soma this step
  double spike = 0.0;    // 0 or the soma amplitude
};

/// Binary tree of compartments rooted at a spiking soma. Each node has at
/// most two children and the whole tree fits one Neuro-Core (<= 1024
/// compartments). Per step, every compartment joins its own biased current
/// with its children's outputs and forwards the result (or its voltage);
/// the root's join result drives the soma's integrate-and-fire dynamics.
class McTree {
 public:
  static constexpr std::size_t kMaxCompartments = 1024;

  /// Throws std::invalid_argument for an empty list, more than one root,
  /// out-of-range parents, >2 children, cycles, or size > 1024.
  McTree(std::vector<Compartment> compartments, JoinOp join, IfNeuron soma);

  /// The pooling chain of Fig.-2 shape: compartment 0 is the soma and
  /// compartment i+1 feeds compartment i.
  static McTree chain(std::size_t length, JoinOp join, IfNeuron soma);

  /// One step with one injected current per compartment (clamped to >= 0).
  McStepResult step(std::span<const double> injected_currents,
                    const TimeBase& tb);

  std::size_t size() const { return comps_.size(); }
  JoinOp join_op() const { return join_; }
  const IfNeuron& soma() const { return soma_; }
  IfNeuron& soma() { return soma_; }
  const Compartment& compartment(std::size_t i) const { return comps_[i]; }
  Compartment& compartment(std::size_t i) { return comps_[i]; }
  void reset();

 private:
  std::vector<Compartment> comps_;
  std::vector<std::vector<int>> children_;
  std::vector<int> eval_order_;  // children strictly before parents
  int root_ = -1;
  JoinOp join_ = JoinOp::Max;
  IfNeuron soma_;
  std::vector<double> out_;  // per-compartment forwarded value (scratch)
};

/// Free-function form of McTree::step.
McStepResult step_mc_tree(McTree& tree, std::span<const double> injected,
                          const TimeBase& tb);

struct MjopNetConfig {
  double scale = 2.0;      // multiplier on the synapsed soma spikes
  double soma_gain = 0.0;  // <= 0 selects 1/dt (1000 at dt = 1 ms)
  double soma_bias = 0.0;
  double soma_decay = 0.0;  // pure integrator by default
  SynapseFilter input_filter{5e-3};
  SynapseFilter output_filter{5e-3};
};

/// MAX join-Op pooling net: incoming spikes are synapsed into currents and
/// injected into a compartment chain whose soma fires at a rate tracking the
/// largest current; the soma's filtered spikes, times `scale`, approximate
/// the true max current.
class MjopNet {
 public:
  MjopNet(std::size_t window_size, const MjopNetConfig& cfg, double dt);

  /// One step over the window's input spike amplitudes; returns the scaled
  /// synapsed soma output.
  double step(std::span<const double> input_spikes);
  void reset();

  std::size_t window_size() const { return in_.size(); }
  double scale() const { return cfg_.scale; }
  double dt() const { return dt_; }
  double last_soma_dv() const { return last_dv_; }
  McTree& tree() { return tree_; }
  const McTree& tree() const { return tree_; }

 private:
  MjopNetConfig cfg_;
  double dt_ = 1e-3;
  McTree tree_;
  std::vector<LowPass> in_;
  LowPass out_;
  std::vector<double> currents_;  // scratch
  double last_dv_ = 0.0;
};

/// Runs the net over whole spike trains and returns the scaled U_out trace.
/// Throws std::invalid_argument on input-count or length mismatch.
CurrentTrace run_mjop_net(MjopNet& net, const std::vector<SpikeTrain>& inputs,
                          const TimeBase& tb);

/// Compartments needed for an r x c pooling window: r*c.
std::size_t mjop_tree_size(std::size_t window_rows, std::size_t window_cols);

/// Symmetric uniform quantization to 2^bits levels over [-max|w|, max|w|],
/// returned dequantized. An all-zero matrix comes back unchanged.
/// bits outside [2, 16] throws std::invalid_argument.
Matrix quantize_weights(const Matrix& weights, int bits);

}  // namespace spikepool
