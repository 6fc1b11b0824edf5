#include "amlgraph/matrix.hpp"

#include "amlgraph/error.hpp"

namespace aml {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix affine_rows(const Matrix& in, const Matrix& w, std::span<const double> bias) {
  if (in.cols != w.cols) throw Error("dimension mismatch: input width " + std::to_string(in.cols) +
                                     " vs weight width " + std::to_string(w.cols));
  if (!bias.empty() && bias.size() != w.rows) throw Error("dimension mismatch: bias");
  Matrix out(in.rows, w.rows);
  for (std::size_t r = 0; r < in.rows; ++r) {
    const double* x = in.data.data() + r * in.cols;
    double* y = out.data.data() + r * out.cols;
    for (std::size_t o = 0; o < w.rows; ++o) {
      const double* wr = w.data.data() + o * w.cols;
      double s = bias.empty() ? 0.0 : bias[o];
      for (std::size_t k = 0; k < in.cols; ++k) s += wr[k] * x[k];
      y[o] = s;
    }
  }
  return out;
}

std::vector<double> affine(const Matrix& w, std::span<const double> x, std::span<const double> b) {
  if (x.size() != w.cols || b.size() != w.rows) throw Error("dimension mismatch in affine map");
  std::vector<double> y(w.rows);
  for (std::size_t o = 0; o < w.rows; ++o) {
    double s = b[o];
    for (std::size_t k = 0; k < w.cols; ++k) s += w(o, k) * x[k];
    y[o] = s;
  }
  return y;
}

}  // namespace aml
