#include "spikepool/pooling.hpp"

#include <algorithm>
#include <stdexcept>

namespace spikepool {

void TensorShape::validate() const {
  if (channels == 0 || height == 0 || width == 0) {
    throw std::invalid_argument("TensorShape: all dims must be >= 1");
  }
}

void PoolSpec::validate() const {
  if (window_rows == 0 || window_cols == 0) {
    throw std::invalid_argument("PoolSpec: window dims must be >= 1");
  }
}

std::string to_string(PoolMethod m) {
  switch (m) {
    case PoolMethod::Mjop:
      return "mjop";
    case PoolMethod::Avam:
      return "avam";
    case PoolMethod::Average:
      return "average";
    case PoolMethod::TrueMax:
      return "true_max";
  }
  return "unknown";
}

PoolMethod pool_method_from_string(const std::string& s) {
  if (s == "mjop") return PoolMethod::Mjop;
  if (s == "avam") return PoolMethod::Avam;
  if (s == "average") return PoolMethod::Average;
  if (s == "true_max") return PoolMethod::TrueMax;
  throw std::invalid_argument("unknown pooling method: " + s);
}

TensorShape pooled_shape(const TensorShape& shape, const PoolSpec& spec) {
  shape.validate();
  spec.validate();
  if (shape.height % spec.window_rows != 0 ||
      shape.width % spec.window_cols != 0) {
    throw std::invalid_argument(
        "pooling requires window dims to divide the tensor dims (no padding)");
  }
  TensorShape out = shape;
  out.height = shape.height / spec.window_rows;
  out.width = shape.width / spec.window_cols;
  return out;
}

std::vector<WindowGroup> extract_windows(const TensorShape& shape,
                                         const PoolSpec& spec) {
  const TensorShape out = pooled_shape(shape, spec);
  std::vector<WindowGroup> groups;
  groups.reserve(out.flat_size());
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t wy = 0; wy < out.height; ++wy) {
      for (std::size_t wx = 0; wx < out.width; ++wx) {
        WindowGroup g;
        g.pooled_index = out.index(c, wy, wx);
        g.input_indices.reserve(spec.window_rows * spec.window_cols);
        for (std::size_t dy = 0; dy < spec.window_rows; ++dy) {
          for (std::size_t dx = 0; dx < spec.window_cols; ++dx) {
            g.input_indices.push_back(shape.index(
                c, wy * spec.window_rows + dy, wx * spec.window_cols + dx));
          }
        }
        groups.push_back(std::move(g));
      }
    }
  }
  return groups;
}

std::size_t CoreMap::core_count() const {
  std::size_t n = 0;
  for (const CoreAssignment& a : assignments) {
    n = std::max(n, static_cast<std::size_t>(a.core_id) + 1);
  }
  return n;
}

CoreMap plan_core_map(const TensorShape& shape, const PoolSpec& spec) {
  shape.validate();
  spec.validate();
  if (spec.window_rows > shape.height || spec.window_cols > shape.width) {
    throw std::invalid_argument("plan_core_map: window does not fit the channel");
  }
  if (shape.height % spec.window_rows != 0 ||
      shape.width % spec.window_cols != 0) {
    throw std::invalid_argument("plan_core_map: window must divide the channel dims");
  }

  constexpr std::size_t kLimit = 1024;
  const std::size_t window_size = spec.window_rows * spec.window_cols;
  if (window_size > kLimit) {
    throw InfeasibleCoreMap(
        "a single pooling window exceeds 1024 compartments and cannot fit one Neuro-Core");
  }

  CoreMap map;
  map.compartments_per_core = kLimit;
  int core = 0;
  const std::size_t channel_size = shape.height * shape.width;
  const std::size_t band_size = spec.window_rows * shape.width;  // one window-row

  for (std::size_t c = 0; c < shape.channels; ++c) {
    if (channel_size <= kLimit) {
      map.assignments.push_back(
          {core++, c, 0, shape.height, 0, shape.width, channel_size});
      continue;
    }
    if (band_size <= kLimit) {
      // Greedy fill of whole window-rows.
      const std::size_t bands_per_core = kLimit / band_size;
      const std::size_t n_bands = shape.height / spec.window_rows;
      for (std::size_t b = 0; b < n_bands; b += bands_per_core) {
        const std::size_t bands = std::min(bands_per_core, n_bands - b);
        map.assignments.push_back({core++, c, b * spec.window_rows,
                                   (b + bands) * spec.window_rows, 0,
                                   shape.width, bands * band_size});
      }
      continue;
    }
    // Even one window-row overflows a core: pack whole windows instead.
    const std::size_t windows_per_core = kLimit / window_size;
    const std::size_t n_cols = shape.width / spec.window_cols;
    const std::size_t n_bands = shape.height / spec.window_rows;
    for (std::size_t b = 0; b < n_bands; ++b) {
      for (std::size_t w = 0; w < n_cols; w += windows_per_core) {
        const std::size_t count = std::min(windows_per_core, n_cols - w);
        map.assignments.push_back({core++, c, b * spec.window_rows,
                                   (b + 1) * spec.window_rows,
                                   w * spec.window_cols,
                                   (w + count) * spec.window_cols,
                                   count * window_size});
      }
    }
  }
  return map;
}

PoolLayer::PoolLayer(const TensorShape& shape, const PoolSpec& spec,
                     const PoolParams& params, double dt)
    : in_shape_(shape),
      out_shape_(pooled_shape(shape, spec)),
      groups_(extract_windows(shape, spec)) {
  const std::size_t k = spec.window_rows * spec.window_cols;
  units_.reserve(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    WindowUnit unit;
    switch (spec.method) {
      case PoolMethod::Mjop: {
        MjopNetConfig cfg;
        cfg.scale = params.mjop_scale;
        cfg.input_filter = params.input_filter;
        cfg.output_filter = params.mjop_output_filter;
        unit.mjop = std::make_unique<MjopNet>(k, cfg, dt);
        break;
      }
      case PoolMethod::Avam: {
        AvamNetConfig cfg;
        cfg.phi = params.avam_phi;
        cfg.radius_per_level = {params.avam_radius};
        cfg.input_filter = params.input_filter;
        cfg.ensemble_filter = params.avam_ensemble_filter;
        cfg.dt = dt;
        unit.avam = std::make_unique<AvamNet>(k, cfg);
        break;
      }
      case PoolMethod::Average:
      case PoolMethod::TrueMax: {
        auto bank = std::make_unique<FilterBankUnit>();
        bank->take_max = (spec.method == PoolMethod::TrueMax);
        bank->filters.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
          bank->filters.emplace_back(params.input_filter, dt);
        }
        unit.bank = std::move(bank);
        break;
      }
    }
    units_.push_back(std::move(unit));
  }
  scratch_.assign(k, 0.0);
}

void PoolLayer::step(std::span<const double> input_spikes,
                     std::span<double> pooled_out) {
  if (input_spikes.size() != in_shape_.flat_size()) {
    throw std::invalid_argument("PoolLayer::step: one spike value per input unit required");
  }
  if (pooled_out.size() != out_shape_.flat_size()) {
    throw std::invalid_argument("PoolLayer::step: pooled output size mismatch");
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const WindowGroup& grp = groups_[g];
    for (std::size_t i = 0; i < grp.input_indices.size(); ++i) {
      scratch_[i] = input_spikes[grp.input_indices[i]];
    }
    WindowUnit& unit = units_[g];
    double value = 0.0;
    if (unit.mjop) {
      value = unit.mjop->step(scratch_);
    } else if (unit.avam) {
      value = unit.avam->step(scratch_);
    } else {
      FilterBankUnit& bank = *unit.bank;
      if (bank.take_max) {
        for (std::size_t i = 0; i < bank.filters.size(); ++i) {
          value = std::max(value, bank.filters[i].step(scratch_[i]));
        }
      } else {
        double sum = 0.0;
        for (std::size_t i = 0; i < bank.filters.size(); ++i) {
          sum += bank.filters[i].step(scratch_[i]);
        }
        value = sum / static_cast<double>(bank.filters.size());
      }
    }
    pooled_out[grp.pooled_index] = value;
  }
}

void PoolLayer::reset() {
  for (WindowUnit& u : units_) {
    if (u.mjop) u.mjop->reset();
    if (u.avam) u.avam->reset();
    if (u.bank) {
      for (LowPass& f : u.bank->filters) f.reset();
    }
  }
}

std::vector<CurrentTrace> pool_layer(const std::vector<SpikeTrain>& input_trains,
                                     const TensorShape& shape,
                                     const PoolSpec& spec,
                                     const PoolParams& params,
                                     const TimeBase& tb) {
  tb.validate();
  if (input_trains.size() != shape.flat_size()) {
    throw std::invalid_argument("pool_layer: one spike train per input unit required");
  }
  for (const SpikeTrain& t : input_trains) {
    if (t.size() != tb.n_steps) {
      throw std::invalid_argument("pool_layer: spike train length mismatch");
    }
  }
  PoolLayer layer(shape, spec, params, tb.dt);
  const std::size_t n_out = layer.out_shape().flat_size();
  std::vector<CurrentTrace> out(n_out);
  for (CurrentTrace& tr : out) tr.values.assign(tb.n_steps, 0.0);

  std::vector<double> spikes(input_trains.size(), 0.0);
  std::vector<double> pooled(n_out, 0.0);
  for (std::size_t t = 0; t < tb.n_steps; ++t) {
    for (std::size_t i = 0; i < input_trains.size(); ++i) {
      spikes[i] = input_trains[i][t];
    }
    layer.step(spikes, pooled);
    for (std::size_t i = 0; i < n_out; ++i) out[i].values[t] = pooled[i];
  }
  return out;
}

}  // namespace spikepool
