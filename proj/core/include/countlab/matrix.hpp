#pragma once

#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

#include "countlab/rng.hpp"

namespace countlab {

// Dense row-major matrix of doubles. All compute is done in 64-bit;
// 32-bit storage is an on-disk checkpoint option only.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(size_t r, size_t c) {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  double at(size_t r, size_t c) const {
    assert(r < rows && c < cols);
    return data[r * cols + c];
  }
  double* row(size_t r) { return data.data() + r * cols; }
  const double* row(size_t r) const { return data.data() + r * cols; }

  size_t size() const { return data.size(); }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  void zero() { fill(0.0); }

  void fill_gaussian(Rng& rng, double stddev) {
    for (double& x : data) x = rng.gaussian(0.0, stddev);
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// A trainable tensor: value plus an accumulated gradient of the same shape.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, size_t r, size_t c)
      : name(std::move(n)), value(r, c), grad(r, c) {}

  void zero_grad() { grad.zero(); }
};

}  // namespace countlab
