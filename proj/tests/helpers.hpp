#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "spikepool/sim.hpp"

namespace test_helpers {

inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_draw(rng);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)) % n;
}

/// Mean absolute error between two traces from `begin` on.
inline double trace_mae(const spikepool::CurrentTrace& a,
                        const spikepool::CurrentTrace& b, std::size_t begin) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = begin; t < a.size(); ++t) {
    sum += std::fabs(a[t] - b[t]);
    ++n;
  }
  return sum / static_cast<double>(n);
}

inline double trace_mean(const spikepool::CurrentTrace& a, std::size_t begin) {
  double sum = 0.0;
  for (std::size_t t = begin; t < a.size(); ++t) sum += a[t];
  return sum / static_cast<double>(a.size() - begin);
}

}  // namespace test_helpers
