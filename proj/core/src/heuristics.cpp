#include "spikepool/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace spikepool {

namespace {

double next_unit(std::mt19937_64& rng) {
  // 53-bit mantissa draw in [0, 1); stable across platforms, unlike the
  // std distributions.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_isi(const std::vector<std::pair<std::size_t, double>>& cdf,
                       std::mt19937_64& rng) {
  const double u = next_unit(rng);
  for (const auto& [isi, cum] : cdf) {
    if (u < cum) return isi;
  }
  return cdf.back().first;
}

}  // namespace

void IsiDistribution::validate() const {
  if (mass.empty()) {
    throw std::invalid_argument("IsiDistribution: empty distribution");
  }
  double total = 0.0;
  for (const auto& [isi, p] : mass) {
    if (isi == 0) throw std::invalid_argument("IsiDistribution: ISIs must be >= 1");
    if (p < 0.0 || !std::isfinite(p)) {
      throw std::invalid_argument("IsiDistribution: masses must be >= 0 and finite");
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("IsiDistribution: masses must sum to 1");
  }
}

IsiDistribution IsiDistribution::light_tailed() {
  IsiDistribution d;
  d.mass = {{2, 0.30}, {3, 0.25}, {4, 0.20}, {5, 0.12},
            {6, 0.08}, {8, 0.03}, {10, 0.02}};
  return d;
}

IsiDistribution IsiDistribution::fat_tailed() {
  IsiDistribution d;
  d.mass = {{2, 0.10},  {3, 0.12},  {4, 0.13}, {6, 0.15}, {8, 0.13},
            {10, 0.10}, {14, 0.09}, {20, 0.08}, {30, 0.06}, {50, 0.04}};
  return d;
}

IsiDistribution collect_isi(const std::vector<SpikeTrain>& trains) {
  std::map<std::size_t, std::size_t> counts;
  std::size_t total = 0;
  for (const SpikeTrain& train : trains) {
    std::size_t last = 0;
    bool seen = false;
    for (std::size_t t = 0; t < train.size(); ++t) {
      if (train[t] <= 0.0) continue;
      if (seen) {
        ++counts[t - last];
        ++total;
      }
      last = t;
      seen = true;
    }
  }
  if (total == 0) {
    throw std::invalid_argument("collect_isi: no measurable inter-spike intervals");
  }
  IsiDistribution dist;
  for (const auto& [isi, n] : counts) {
    dist.mass[isi] = static_cast<double>(n) / static_cast<double>(total);
  }
  return dist;
}

std::vector<std::vector<std::size_t>> sample_groups(const IsiDistribution& dist,
                                                    const SweepConfig& cfg) {
  dist.validate();
  if (cfg.n_groups == 0 || cfg.group_size == 0) {
    throw std::invalid_argument("sample_groups: n_groups and group_size must be >= 1");
  }
  std::vector<std::pair<std::size_t, double>> cdf;
  double cum = 0.0;
  for (const auto& [isi, p] : dist.mass) {
    cum += p;
    cdf.emplace_back(isi, cum);
  }
  cdf.back().second = 1.0;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<std::size_t>> groups(cfg.n_groups);
  for (auto& g : groups) {
    g.reserve(cfg.group_size);
    for (std::size_t i = 0; i < cfg.group_size; ++i) g.push_back(sample_isi(cdf, rng));
  }
  return groups;
}

CurrentTrace true_max_oracle(const std::vector<CurrentTrace>& traces) {
  if (traces.empty()) {
    throw std::invalid_argument("true_max_oracle: at least one trace required");
  }
  const std::size_t n = traces.front().size();
  for (const CurrentTrace& t : traces) {
    if (t.size() != n) {
      throw std::invalid_argument("true_max_oracle: trace length mismatch");
    }
  }
  CurrentTrace out;
  out.values.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double m = traces.front()[t];
    for (std::size_t i = 1; i < traces.size(); ++i) m = std::max(m, traces[i][t]);
    out.values[t] = m;
  }
  return out;
}

CurrentTrace exact_max_oracle(const std::vector<SpikeTrain>& trains,
                              const SynapseFilter& f, const TimeBase& tb) {
  if (trains.empty()) {
    throw std::invalid_argument("exact_max_oracle: at least one train required");
  }
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t i = 0; i < trains.size(); ++i) {
    std::size_t count = 0;
    for (double a : trains[i].amplitudes) count += (a > 0.0) ? 1 : 0;
    if (count > best_count) {  // ties keep the lowest index
      best_count = count;
      best = i;
    }
  }
  return filter_spikes(trains[best], f, tb);
}

double steady_state_mean(const CurrentTrace& trace) {
  if (trace.size() == 0) {
    throw std::invalid_argument("steady_state_mean: empty trace");
  }
  const std::size_t begin = trace.size() / 2;
  double sum = 0.0;
  for (std::size_t t = begin; t < trace.size(); ++t) sum += trace[t];
  return sum / static_cast<double>(trace.size() - begin);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y,
                           bool* defined) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("pearson_correlation: series must be non-empty and equal length");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    if (defined) *defined = false;
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (defined) *defined = true;
  return sxy / std::sqrt(sxx * syy);
}

double regression_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("regression_slope: series must be non-empty and equal length");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

SweepResult evaluate_sweep(const IsiDistribution& dist, const SweepConfig& cfg,
                           PoolMethod method) {
  if (method != PoolMethod::Mjop && method != PoolMethod::Avam) {
    throw std::invalid_argument("evaluate_sweep: method must be mjop or avam");
  }
  if (cfg.grid.empty()) {
    throw std::invalid_argument("evaluate_sweep: parameter grid must not be empty");
  }
  cfg.tb.validate();

  const auto groups = sample_groups(dist, cfg);

  // Phases are drawn from the same deterministic stream, after the ISIs.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto next_unit_local = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };

  SweepResult result;
  result.grid = cfg.grid;
  result.true_max_mean.reserve(groups.size());
  result.average_mean.reserve(groups.size());
  result.estimate_mean.assign(cfg.grid.size(), {});
  for (auto& v : result.estimate_mean) v.reserve(groups.size());

  for (const auto& group : groups) {
    std::vector<SpikeTrain> trains;
    trains.reserve(group.size());
    for (std::size_t isi : group) {
      const std::size_t phase =
          std::min(static_cast<std::size_t>(next_unit_local() * static_cast<double>(isi)),
                   isi - 1);
      trains.push_back(
          make_periodic_train(isi, cfg.spike_amplitude, phase, cfg.tb));
    }

    std::vector<CurrentTrace> currents;
    currents.reserve(trains.size());
    for (const SpikeTrain& t : trains) {
      currents.push_back(filter_spikes(t, cfg.input_filter, cfg.tb));
    }
    const CurrentTrace truemax = true_max_oracle(currents);

    CurrentTrace avg;
    avg.values.assign(cfg.tb.n_steps, 0.0);
    for (std::size_t t = 0; t < cfg.tb.n_steps; ++t) {
      double sum = 0.0;
      for (const CurrentTrace& u : currents) sum += u[t];
      avg.values[t] = sum / static_cast<double>(currents.size());
      if (avg.values[t] > truemax[t]) ++result.avg_above_true_max_steps;
    }

    result.true_max_mean.push_back(steady_state_mean(truemax));
    result.average_mean.push_back(steady_state_mean(avg));

    for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
      CurrentTrace estimate;
      if (method == PoolMethod::Mjop) {
        MjopNetConfig net_cfg;
        net_cfg.scale = cfg.grid[gi];
        net_cfg.input_filter = cfg.input_filter;
        net_cfg.output_filter = cfg.mjop_output_filter;
        MjopNet net(group.size(), net_cfg, cfg.tb.dt);
        estimate = run_mjop_net(net, trains, cfg.tb);
      } else {
        AvamNetConfig net_cfg;
        net_cfg.phi = cfg.phi;
        net_cfg.radius_per_level = {cfg.grid[gi]};
        net_cfg.input_filter = cfg.input_filter;
        net_cfg.ensemble_filter = cfg.avam_ensemble_filter;
        net_cfg.dt = cfg.tb.dt;
        AvamNet net(group.size(), net_cfg);
        estimate = run_avam_net(net, trains, cfg.tb);
      }
      result.estimate_mean[gi].push_back(steady_state_mean(estimate));
    }
  }

  result.summary.reserve(cfg.grid.size());
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    GridPointSummary s;
    s.value = cfg.grid[gi];
    s.correlation = pearson_correlation(result.true_max_mean,
                                        result.estimate_mean[gi],
                                        &s.correlation_defined);
    s.slope = regression_slope(result.true_max_mean, result.estimate_mean[gi]);
    result.summary.push_back(s);
  }
  return result;
}

}  // namespace spikepool
