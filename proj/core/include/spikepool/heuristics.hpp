#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "spikepool/pooling.hpp"
#include "spikepool/sim.hpp"

namespace spikepool {

/// Probability mass over inter-spike intervals (in steps, >= 1).
struct IsiDistribution {
  std::map<std::size_t, double> mass;

  void validate() const;  // masses >= 0 summing to ~1, ISIs >= 1
  bool empty() const { return mass.empty(); }

  /// Synthetic stand-ins for the dataset-derived distributions: a
  /// light-tailed one with ISIs mostly 2-6, and a fat-tailed one spreading
  /// far out.
  static IsiDistribution light_tailed();
  static IsiDistribution fat_tailed();
};

/// Histogram over the inter-spike gaps pooled across all trains. Trains
/// with fewer than two spikes contribute nothing; if no train yields a gap,
/// throws std::invalid_argument.
IsiDistribution collect_isi(const std::vector<SpikeTrain>& trains);

struct SweepConfig {
  std::size_t n_groups = 256;
  std::size_t group_size = 4;
  std::vector<double> grid;  // scale values (MJOP) or radius values (AVAM)
  std::uint64_t seed = 0;
  TimeBase tb{1e-3, 300};
  double spike_amplitude = 1.0;
  SynapseFilter input_filter{5e-3};
  SynapseFilter mjop_output_filter{5e-3};
  SynapseFilter avam_ensemble_filter{1e-3};
  double phi = 500.0;
};

/// n_groups tuples of group_size ISIs sampled i.i.d. from the histogram,
/// deterministically from cfg.seed.
std::vector<std::vector<std::size_t>> sample_groups(const IsiDistribution& dist,
                                                    const SweepConfig& cfg);

struct GridPointSummary {
  double value = 0.0;
  double correlation = 0.0;  // NaN when not defined
  double slope = 0.0;
  bool correlation_defined = false;
};

struct SweepResult {
  std::vector<double> grid;
  std::vector<double> true_max_mean;                // per group
  std::vector<double> average_mean;                 // per group
  std::vector<std::vector<double>> estimate_mean;   // [grid point][group]
  std::vector<GridPointSummary> summary;
  std::size_t avg_above_true_max_steps = 0;         // stays 0 by construction
};

/// Builds periodic trains from sampled ISI groups (random phases), runs the
/// chosen net per grid value, and correlates the steady-state estimate means
/// against the true max. method must be Mjop or Avam.
SweepResult evaluate_sweep(const IsiDistribution& dist, const SweepConfig& cfg,
                           PoolMethod method);

/// Elementwise max over the traces (the quantity both nets approximate).
CurrentTrace true_max_oracle(const std::vector<CurrentTrace>& traces);

/// Filtered current of the single maximally firing train (ties to the
/// lowest index).
CurrentTrace exact_max_oracle(const std::vector<SpikeTrain>& trains,
                              const SynapseFilter& f, const TimeBase& tb);

/// Mean over the last half of the trace.
double steady_state_mean(const CurrentTrace& trace);

/// Pearson correlation; *defined is cleared when either series has zero
/// variance (the value is then NaN).
double pearson_correlation(std::span<const double> x, std::span<const double> y,
                           bool* defined);

/// Least-squares slope of y regressed on x.
double regression_slope(std::span<const double> x, std::span<const double> y);

}  // namespace spikepool
