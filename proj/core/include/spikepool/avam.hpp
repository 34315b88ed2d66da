#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spikepool/sim.hpp"

namespace spikepool {

/// Two-neuron tuning-curve ensemble. Encoders are +1 and -1 with intercepts
/// at 0: the first neuron fires for positive inputs and the second for
/// negative ones, each reaching the max firing rate phi at +/- radius.
/// Inputs beyond the radius saturate (and are counted).
class Ensemble2 {
 public:
  Ensemble2(double phi, double radius, double dt);

  struct Spikes {
    double pos = 0.0;
    double neg = 0.0;
  };

  /// Advances both neurons one step for the scalar input x.
  Spikes step(double x);

  /// Smooth firing rate (spikes/step) of one neuron for its encoded input:
  /// clamp(phi*dt * x/radius, 0, min(phi*dt, 1)).
  double neuron_rate(double x_encoded) const;

  /// Rate-model output of the full scaled pathway, i.e. the |x| estimate
  /// with quantization disabled: min(|x|, radius) while phi*dt <= 1.
  double abs_rate_model(double x) const;

  double phi() const { return phi_; }
  double radius() const { return radius_; }
  /// Max-rate response in spikes/step (phi*dt), the phi' the r/phi' output
  /// scaling divides by.
  double max_rate_per_step() const { return phi_ * dt_; }
  long saturation_events() const { return saturation_events_; }
  void reset();

 private:
  double phi_ = 500.0;
  double radius_ = 0.25;
  double dt_ = 1e-3;
  IfNeuron pos_;
  IfNeuron neg_;
  long saturation_events_ = 0;
};

struct PairMaxConfig {
  double phi = 500.0;
  double radius = 0.25;
  SynapseFilter ensemble_filter{1e-3};
  double dt = 1e-3;
  bool rate_model = false;  // replace the ensemble neurons by their rate model
};

/// max(a, b) network: nodes A and B feed node O directly with weight 1/2
/// each, and feed the ensemble with weights 1/2 and -1/2 so it sees
/// (a - b)/2. The filtered ensemble spikes, scaled by radius/phi' per
/// neuron, add the |a - b|/2 estimate at O.
class PairMaxNet {
 public:
  explicit PairMaxNet(const PairMaxConfig& cfg);

  /// One step: node O's output for the input currents a and b.
  double step(double a, double b);
  void reset();

  const Ensemble2& ensemble() const { return ens_; }
  const PairMaxConfig& config() const { return cfg_; }

 private:
  PairMaxConfig cfg_;
  Ensemble2 ens_;
  LowPass filt_pos_;
  LowPass filt_neg_;
  double out_weight_ = 0.0;  // radius / (phi * dt)
};

/// Estimates |x| per step by driving the ensemble with the trace and summing
/// the scaled, filtered spike outputs.
CurrentTrace abs_estimate(const CurrentTrace& x_trace, Ensemble2& ens,
                          const SynapseFilter& tau_e, const TimeBase& tb);

/// Runs the pair-max network over two current traces.
CurrentTrace pair_max(const CurrentTrace& a_trace, const CurrentTrace& b_trace,
                      PairMaxNet& net, const TimeBase& tb);

/// Reduction-tree layout for multi-input nets.
enum class TreeShape { Balanced, Chain };

struct AvamNetConfig {
  double phi = 500.0;
  std::vector<double> radius_per_level = {0.25};  // last entry reused beyond
  SynapseFilter input_filter{5e-3};
  SynapseFilter ensemble_filter{1e-3};
  double dt = 1e-3;
  TreeShape shape = TreeShape::Balanced;
  bool rate_model = false;
};

/// Hierarchical max net: a reduction tree of pair-max networks over k
/// inputs. k = 1 is a pure passthrough. Uses 2k - 2 neurons (k - 1 pair
/// networks) for every k >= 1.
class AvamNet {
 public:
  AvamNet(std::size_t n_inputs, const AvamNetConfig& cfg);

  /// One step over input spike amplitudes; the inputs are synapsed
  /// internally before reduction.
  double step(std::span<const double> input_spikes);

  /// One step of the reduction on already-represented currents (no input
  /// filtering); this is what runs inside pooling layers fed by currents.
  double step_currents(std::span<const double> currents);

  void reset();

  std::size_t n_inputs() const { return n_inputs_; }
  std::size_t pair_net_count() const { return pairs_.size(); }
  std::size_t neuron_count() const { return 2 * pairs_.size(); }
  long saturation_events() const;
  const AvamNetConfig& config() const { return cfg_; }

 private:
  struct ReduceOp {
    std::size_t lhs = 0;
    std::size_t rhs = 0;
  };

  double reduce();

  AvamNetConfig cfg_;
  std::size_t n_inputs_ = 0;
  std::vector<LowPass> in_;
  std::vector<ReduceOp> plan_;      // ops append their result to the signal list
  std::vector<PairMaxNet> pairs_;   // one per op
  std::vector<double> signals_;     // scratch: inputs then op results
};

/// Builds the reduction tree for a k-sized pooling window; the single-radius
/// overload applies one radius at every level.
AvamNet build_avam_tree(std::size_t k, double phi, double radius);
AvamNet build_avam_tree(std::size_t k, double phi,
                        const std::vector<double>& radius_per_level,
                        TreeShape shape = TreeShape::Balanced);

/// Runs the net over whole spike trains and returns the root node O trace.
CurrentTrace run_avam_net(AvamNet& net, const std::vector<SpikeTrain>& inputs,
                          const TimeBase& tb);

}  // namespace spikepool
