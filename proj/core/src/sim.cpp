#include "spikepool/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikepool {

void TimeBase::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("TimeBase: dt must be positive and finite");
  }
  if (n_steps == 0) {
    throw std::invalid_argument("TimeBase: n_steps must be >= 1");
  }
}

void SynapseFilter::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("SynapseFilter: tau must be positive and finite");
  }
}

LowPass::LowPass(const SynapseFilter& f, double dt) {
  f.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("LowPass: dt must be positive");
  alpha_ = std::exp(-dt / f.tau);
}

SpikeTrain make_periodic_train(std::size_t period, double amplitude,
                               std::size_t phase, const TimeBase& tb) {
  tb.validate();
  if (period == 0) {
    throw std::invalid_argument("make_periodic_train: period must be >= 1");
  }
  if (amplitude < 0.0 || !std::isfinite(amplitude)) {
    throw std::invalid_argument("make_periodic_train: amplitude must be >= 0");
  }
  SpikeTrain train;
  train.amplitudes.assign(tb.n_steps, 0.0);
  for (std::size_t t = phase; t < tb.n_steps; t += period) {
    train.amplitudes[t] = amplitude;
  }
  return train;
}

CurrentTrace filter_spikes(const SpikeTrain& train, const SynapseFilter& f,
                           const TimeBase& tb) {
  LowPass lp(f, tb.dt);
  CurrentTrace trace;
  trace.values.reserve(train.size());
  for (double a : train.amplitudes) {
    trace.values.push_back(lp.step(a));
  }
  return trace;
}

double step_if_neuron(IfNeuron& neuron, double input_current,
                      const TimeBase& tb) {
  if (!std::isfinite(input_current)) {
    throw std::domain_error("step_if_neuron: non-finite input current");
  }
  const double drive = neuron.gain * input_current + neuron.bias;
  // One spike per step: the per-step charge saturates at one threshold.
  neuron.voltage += std::min(tb.dt * drive, 1.0);
  if (neuron.voltage < 0.0) neuron.voltage = 0.0;
  if (neuron.voltage >= 1.0) {
    neuron.voltage -= 1.0;
    return neuron.amplitude;
  }
  return 0.0;
}

double rate_model_if(double input_current, const IfNeuron& neuron,
                     const TimeBase& tb) {
  const double drive = neuron.gain * input_current + neuron.bias;
  return std::clamp(tb.dt * drive, 0.0, 1.0);
}

}  // namespace spikepool
