#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikepool/avam.hpp"
#include "spikepool/mjop.hpp"
#include "spikepool/sim.hpp"

namespace spikepool {

enum class Layout { ChannelsFirst, ChannelsLast };

struct TensorShape {
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  Layout layout = Layout::ChannelsLast;

  std::size_t flat_size() const { return channels * height * width; }
  std::size_t index(std::size_t c, std::size_t y, std::size_t x) const {
    return layout == Layout::ChannelsFirst
               ? (c * height + y) * width + x
               : (y * width + x) * channels + c;
  }
  void validate() const;  // all dims >= 1
};

enum class PoolMethod { Mjop, Avam, Average, TrueMax };

std::string to_string(PoolMethod m);
PoolMethod pool_method_from_string(const std::string& s);

/// Non-overlapping, padding-free pooling: the stride equals the window, and
/// the tensor dims must divide evenly.
struct PoolSpec {
  std::size_t window_rows = 2;
  std::size_t window_cols = 2;
  PoolMethod method = PoolMethod::TrueMax;

  void validate() const;  // window dims >= 1
};

TensorShape pooled_shape(const TensorShape& shape, const PoolSpec& spec);

/// One pooling window: the flat input indices it reads (window row-major)
/// and the flat index of the pooled output it writes.
struct WindowGroup {
  std::vector<std::size_t> input_indices;
  std::size_t pooled_index = 0;
};

/// Groups every input unit into exactly one window, ordered channel-major
/// then row-major over windows. Throws std::invalid_argument when the
/// window does not divide the tensor dims.
std::vector<WindowGroup> extract_windows(const TensorShape& shape,
                                         const PoolSpec& spec);

struct CoreAssignment {
  int core_id = 0;
  std::size_t channel = 0;
  std::size_t row_begin = 0, row_end = 0;  // [begin, end)
  std::size_t col_begin = 0, col_end = 0;
  std::size_t compartments = 0;
};

struct CoreMap {
  std::vector<CoreAssignment> assignments;
  std::size_t compartments_per_core = 1024;

  std::size_t core_count() const;
};

struct InfeasibleCoreMap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Maps each channel to Neuro-Cores of at most 1024 compartments so that no
/// pooling window straddles two cores. Channels whose flattened size fits a
/// core map whole; larger channels split greedily along whole window-rows
/// (falling back to whole windows when even one window-row is too large).
/// Throws InfeasibleCoreMap when a single window exceeds 1024 inputs.
CoreMap plan_core_map(const TensorShape& shape, const PoolSpec& spec);

/// Method parameters shared by all windows of a pooling layer.
struct PoolParams {
  SynapseFilter input_filter{5e-3};
  double mjop_scale = 2.0;
  SynapseFilter mjop_output_filter{5e-3};
  double avam_phi = 500.0;
  double avam_radius = 0.25;
  SynapseFilter avam_ensemble_filter{1e-3};
};

/// Stateful pooling layer: one backend net per window, stepped in lockstep.
/// Consumes the previous layer's spike amplitudes and emits pooled currents.
class PoolLayer {
 public:
  PoolLayer(const TensorShape& shape, const PoolSpec& spec,
            const PoolParams& params, double dt);

  void step(std::span<const double> input_spikes, std::span<double> pooled_out);

  const TensorShape& out_shape() const { return out_shape_; }
  std::size_t n_windows() const { return groups_.size(); }
  void reset();

 private:
  struct FilterBankUnit {  // average / true-max over filtered inputs
    std::vector<LowPass> filters;
    bool take_max = false;
  };
  struct WindowUnit {
    std::unique_ptr<MjopNet> mjop;
    std::unique_ptr<AvamNet> avam;
    std::unique_ptr<FilterBankUnit> bank;
  };

  TensorShape in_shape_;
  TensorShape out_shape_;
  std::vector<WindowGroup> groups_;
  std::vector<WindowUnit> units_;
  std::vector<double> scratch_;
};

/// Runs a pooling layer over whole spike trains and reassembles the pooled
/// tensor of current traces in pooled-index order.
std::vector<CurrentTrace> pool_layer(const std::vector<SpikeTrain>& input_trains,
                                     const TensorShape& shape,
                                     const PoolSpec& spec,
                                     const PoolParams& params,
                                     const TimeBase& tb);

}  // namespace spikepool
