#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace spikepool {

/// Fixed-step time base shared by every simulation in the library.
struct TimeBase {
  double dt = 1e-3;         // seconds per step
  std::size_t n_steps = 1;  // total steps in a run

  void validate() const;  // throws std::invalid_argument on dt <= 0 or n_steps == 0
};

/// Per-step spike amplitudes of one neuron; 0 means no spike at that step.
/// Entries are non-negative and at most one spike occurs per step.
struct SpikeTrain {
  std::vector<double> amplitudes;

  std::size_t size() const { return amplitudes.size(); }
  double operator[](std::size_t t) const { return amplitudes[t]; }
  double& operator[](std::size_t t) { return amplitudes[t]; }
};

/// Filtered spike train; the post-synaptic current that stands in for a
/// rate activation.
struct CurrentTrace {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t t) const { return values[t]; }
  double& operator[](std::size_t t) { return values[t]; }
};

/// First-order low-pass synapse with time constant tau (seconds).
struct SynapseFilter {
  double tau = 5e-3;

  void validate() const;  // tau > 0
};

/// Stateful one-pole low-pass: y[t] = a*y[t-1] + (1-a)*x[t], a = exp(-dt/tau).
/// DC gain is 1, so a train spiking every step with amplitude A settles at A.
class LowPass {
 public:
  LowPass() : LowPass(SynapseFilter{}, 1e-3) {}
  LowPass(const SynapseFilter& f, double dt);

  double step(double x) {
    y_ = alpha_ * y_ + (1.0 - alpha_) * x;
    return y_;
  }
  double value() const { return y_; }
  void reset() { y_ = 0.0; }

 private:
  double alpha_ = 0.0;
  double y_ = 0.0;
};

/// Integrate-and-fire unit with threshold 1, reset by subtraction and a hard
/// one-spike-per-step limit. The voltage stays in [0, 1) between steps; the
/// per-step charge saturates at one threshold's worth, so overdrive yields a
/// spike every step rather than an error.
struct IfNeuron {
  double gain = 1.0;       // drive per unit input current
  double bias = 0.0;       // constant drive
  double amplitude = 1.0;  // value written into the spike train when firing
  double voltage = 0.0;    // internal state
};

/// Spikes of the given amplitude at steps phase, phase+period, ...
/// Throws std::invalid_argument for period == 0 or amplitude < 0.
SpikeTrain make_periodic_train(std::size_t period, double amplitude,
                               std::size_t phase, const TimeBase& tb);

/// Low-pass filters a spike train into a post-synaptic current, starting
/// from u[-1] = 0.
CurrentTrace filter_spikes(const SpikeTrain& train, const SynapseFilter& f,
                           const TimeBase& tb);

/// Advances the neuron one step under the given input current and returns
/// the emitted spike amplitude (0 or neuron.amplitude). Non-finite input
/// throws std::domain_error.
double step_if_neuron(IfNeuron& neuron, double input_current,
                      const TimeBase& tb);

/// The smooth firing rate (spikes/step) whose spiking counterpart the IF
/// neuron quantizes: clamp(dt * (gain*input + bias), 0, 1).
double rate_model_if(double input_current, const IfNeuron& neuron,
                     const TimeBase& tb);

}  // namespace spikepool
