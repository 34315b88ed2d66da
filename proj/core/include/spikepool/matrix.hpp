#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace spikepool {

/// Dense row-major matrix of doubles. Deliberately minimal: the networks
/// here are small enough that a plain loop matvec is all we need.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, rows*cols entries

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols) {
    throw std::invalid_argument("matvec: vector length does not match matrix columns");
  }
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

}  // namespace spikepool
