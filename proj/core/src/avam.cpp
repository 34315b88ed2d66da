#include "spikepool/avam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikepool {

Ensemble2::Ensemble2(double phi, double radius, double dt)
    : phi_(phi), radius_(radius), dt_(dt) {
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw std::invalid_argument("Ensemble2: phi must be positive");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("Ensemble2: radius must be positive");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("Ensemble2: dt must be positive");
  // gain phi/radius makes the per-step drive phi*dt at the radius edge.
  pos_ = IfNeuron{phi / radius, 0.0, 1.0, 0.0};
  neg_ = IfNeuron{phi / radius, 0.0, 1.0, 0.0};
}

Ensemble2::Spikes Ensemble2::step(double x) {
  if (x > radius_ || -x > radius_) ++saturation_events_;
  TimeBase tb{dt_, 1};
  Spikes s;
  s.pos = step_if_neuron(pos_, std::clamp(x, 0.0, radius_), tb);
  s.neg = step_if_neuron(neg_, std::clamp(-x, 0.0, radius_), tb);
  return s;
}

double Ensemble2::neuron_rate(double x_encoded) const {
  const double drive = phi_ * dt_ * std::clamp(x_encoded, 0.0, radius_) / radius_;
  return std::min(drive, 1.0);
}

double Ensemble2::abs_rate_model(double x) const {
  const double per_step = phi_ * dt_;
  return (neuron_rate(x) + neuron_rate(-x)) * radius_ / per_step;
}

void Ensemble2::reset() {
  pos_.voltage = 0.0;
  neg_.voltage = 0.0;
  saturation_events_ = 0;
}

PairMaxNet::PairMaxNet(const PairMaxConfig& cfg)
    : cfg_(cfg),
      ens_(cfg.phi, cfg.radius, cfg.dt),
      filt_pos_(cfg.ensemble_filter, cfg.dt),
      filt_neg_(cfg.ensemble_filter, cfg.dt),
      out_weight_(cfg.radius / (cfg.phi * cfg.dt)) {}

double PairMaxNet::step(double a, double b) {
  const double direct = 0.5 * a + 0.5 * b;   // A->O and B->O, weight 1/2
  const double diff = 0.5 * a - 0.5 * b;     // A->E 1/2, B->E -1/2
  if (cfg_.rate_model) {
    return direct + ens_.abs_rate_model(diff);
  }
  const Ensemble2::Spikes s = ens_.step(diff);
  return direct +
         (filt_pos_.step(s.pos) + filt_neg_.step(s.neg)) * out_weight_;
}

void PairMaxNet::reset() {
  ens_.reset();
  filt_pos_.reset();
  filt_neg_.reset();
}

CurrentTrace abs_estimate(const CurrentTrace& x_trace, Ensemble2& ens,
                          const SynapseFilter& tau_e, const TimeBase& tb) {
  tb.validate();
  LowPass fp(tau_e, tb.dt);
  LowPass fn(tau_e, tb.dt);
  const double w = ens.radius() / ens.max_rate_per_step();
  CurrentTrace out;
  out.values.reserve(x_trace.size());
  for (double x : x_trace.values) {
    const Ensemble2::Spikes s = ens.step(x);
    out.values.push_back((fp.step(s.pos) + fn.step(s.neg)) * w);
  }
  return out;
}

CurrentTrace pair_max(const CurrentTrace& a_trace, const CurrentTrace& b_trace,
                      PairMaxNet& net, const TimeBase& tb) {
  if (a_trace.size() != b_trace.size()) {
    throw std::invalid_argument("pair_max: trace length mismatch");
  }
  CurrentTrace out;
  out.values.reserve(a_trace.size());
  for (std::size_t t = 0; t < a_trace.size(); ++t) {
    out.values.push_back(net.step(a_trace[t], b_trace[t]));
  }
  return out;
}

AvamNet::AvamNet(std::size_t n_inputs, const AvamNetConfig& cfg)
    : cfg_(cfg), n_inputs_(n_inputs) {
  if (n_inputs == 0) {
    throw std::invalid_argument("AvamNet: at least one input required");
  }
  if (cfg.radius_per_level.empty()) {
    throw std::invalid_argument("AvamNet: radius_per_level must not be empty");
  }
  in_.reserve(n_inputs);
  for (std::size_t i = 0; i < n_inputs; ++i) {
    in_.emplace_back(cfg.input_filter, cfg.dt);
  }

  const auto add_pair = [&](std::size_t lhs, std::size_t rhs,
                            std::size_t level) {
    plan_.push_back({lhs, rhs});
    PairMaxConfig pc;
    pc.phi = cfg.phi;
    pc.radius =
        cfg.radius_per_level[std::min(level, cfg.radius_per_level.size() - 1)];
    pc.ensemble_filter = cfg.ensemble_filter;
    pc.dt = cfg.dt;
    pc.rate_model = cfg.rate_model;
    pairs_.emplace_back(pc);
  };

  // Signals 0..k-1 are the (filtered) inputs; each op appends its result.
  std::size_t next = n_inputs;
  if (cfg.shape == TreeShape::Balanced) {
    std::vector<std::size_t> frontier(n_inputs);
    for (std::size_t i = 0; i < n_inputs; ++i) frontier[i] = i;
    std::size_t level = 0;
    while (frontier.size() > 1) {
      std::vector<std::size_t> up;
      for (std::size_t i = 0; i + 1 < frontier.size(); i += 2) {
        add_pair(frontier[i], frontier[i + 1], level);
        up.push_back(next++);
      }
      if (frontier.size() % 2 == 1) up.push_back(frontier.back());
      frontier.swap(up);
      ++level;
    }
  } else {
    std::size_t acc = 0;
    for (std::size_t i = 1; i < n_inputs; ++i) {
      add_pair(acc, i, i - 1);
      acc = next++;
    }
  }
  signals_.assign(n_inputs + plan_.size(), 0.0);
}

double AvamNet::reduce() {
  for (std::size_t i = 0; i < plan_.size(); ++i) {
    signals_[n_inputs_ + i] =
        pairs_[i].step(signals_[plan_[i].lhs], signals_[plan_[i].rhs]);
  }
  return signals_.back();
}

double AvamNet::step(std::span<const double> input_spikes) {
  if (input_spikes.size() != n_inputs_) {
    throw std::invalid_argument("AvamNet::step: input count mismatch");
  }
  for (std::size_t i = 0; i < n_inputs_; ++i) {
    signals_[i] = in_[i].step(input_spikes[i]);
  }
  return reduce();
}

double AvamNet::step_currents(std::span<const double> currents) {
  if (currents.size() != n_inputs_) {
    throw std::invalid_argument("AvamNet::step_currents: input count mismatch");
  }
  for (std::size_t i = 0; i < n_inputs_; ++i) signals_[i] = currents[i];
  return reduce();
}

void AvamNet::reset() {
  for (LowPass& f : in_) f.reset();
  for (PairMaxNet& p : pairs_) p.reset();
  std::fill(signals_.begin(), signals_.end(), 0.0);
}

long AvamNet::saturation_events() const {
  long total = 0;
  for (const PairMaxNet& p : pairs_) total += p.ensemble().saturation_events();
  return total;
}

AvamNet build_avam_tree(std::size_t k, double phi, double radius) {
  return build_avam_tree(k, phi, std::vector<double>{radius});
}

AvamNet build_avam_tree(std::size_t k, double phi,
                        const std::vector<double>& radius_per_level,
                        TreeShape shape) {
  AvamNetConfig cfg;
  cfg.phi = phi;
  cfg.radius_per_level = radius_per_level;
  cfg.shape = shape;
  return AvamNet(k, cfg);
}

CurrentTrace run_avam_net(AvamNet& net, const std::vector<SpikeTrain>& inputs,
                          const TimeBase& tb) {
  tb.validate();
  if (inputs.size() != net.n_inputs()) {
    throw std::invalid_argument("run_avam_net: expected one spike train per input");
  }
  for (const SpikeTrain& t : inputs) {
    if (t.size() != tb.n_steps) {
      throw std::invalid_argument("run_avam_net: spike train length mismatch");
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

}  // namespace spikepool
