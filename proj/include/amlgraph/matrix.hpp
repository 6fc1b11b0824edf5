#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aml {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  static Matrix identity(std::size_t n);

  bool operator==(const Matrix&) const = default;
};

/// out = in * w^T (+ bias per row); in: n x k, w: m x k, out: n x m.
Matrix affine_rows(const Matrix& in, const Matrix& w, std::span<const double> bias = {});

/// y = w x + b for a single vector.
std::vector<double> affine(const Matrix& w, std::span<const double> x, std::span<const double> b);

}  // namespace aml
