#include "amlgraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace aml {

namespace {

void relu_into(const Matrix& pre, Matrix& out) {
  out = pre;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
}

Matrix propagate(const NormalizedAdjacency& adj, const Matrix& t) {
  Matrix out(adj.size(), t.cols);
  for (std::size_t i = 0; i < adj.size(); ++i) {
    double* y = out.data.data() + i * out.cols;
    for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
      const double c = adj.coefficients[k];
      const double* x = t.data.data() + adj.columns[k] * t.cols;
      for (std::size_t j = 0; j < t.cols; ++j) y[j] += c * x[j];
    }
  }
  return out;
}

// Transpose of propagate: scatter each row's gradient back to its sources.
Matrix propagate_transposed(const NormalizedAdjacency& adj, const Matrix& g) {
  Matrix out(adj.size(), g.cols);
  for (std::size_t i = 0; i < adj.size(); ++i) {
    const double* gi = g.data.data() + i * g.cols;
    for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
      const double c = adj.coefficients[k];
      double* y = out.data.data() + adj.columns[k] * out.cols;
      for (std::size_t j = 0; j < g.cols; ++j) y[j] += c * gi[j];
    }
  }
  return out;
}

// grad_w += outer(dy_i, x_i) summed over rows.
void accumulate_outer(const Matrix& dy, const Matrix& x, Matrix& grad_w) {
  for (std::size_t r = 0; r < dy.rows; ++r) {
    const double* d = dy.data.data() + r * dy.cols;
    const double* xi = x.data.data() + r * x.cols;
    for (std::size_t o = 0; o < dy.cols; ++o) {
      if (d[o] == 0.0) continue;
      double* w = grad_w.data.data() + o * grad_w.cols;
      for (std::size_t k = 0; k < x.cols; ++k) w[k] += d[o] * xi[k];
    }
  }
}

// dx = dy * W (n x m times m x k).
Matrix back_through(const Matrix& dy, const Matrix& w) {
  Matrix dx(dy.rows, w.cols);
  for (std::size_t r = 0; r < dy.rows; ++r) {
    const double* d = dy.data.data() + r * dy.cols;
    double* out = dx.data.data() + r * dx.cols;
    for (std::size_t o = 0; o < dy.cols; ++o) {
      if (d[o] == 0.0) continue;
      const double* wr = w.data.data() + o * w.cols;
      for (std::size_t k = 0; k < w.cols; ++k) out[k] += d[o] * wr[k];
    }
  }
  return dx;
}

void mask_relu(Matrix& grad, const Matrix& pre) {
  for (std::size_t i = 0; i < grad.data.size(); ++i) {
    if (!(pre.data[i] > 0.0)) grad.data[i] = 0.0;
  }
}

}  // namespace

void ModelDims::validate() const {
  if (struct_width == 0 || embed_dim == 0 || fused_width == 0 || hidden_width == 0 || layers == 0) {
    throw Error("model dimensions must all be positive");
  }
}

GcnModel GcnModel::zeros(const ModelDims& dims) {
  dims.validate();
  GcnModel m;
  m.dims = dims;
  m.encoder.weight = Matrix(dims.struct_width, kStructuralInputs);
  m.encoder.bias.assign(dims.struct_width, 0.0);
  m.fusion.weight = Matrix(dims.fused_width, dims.struct_width + dims.embed_dim);
  m.fusion.bias.assign(dims.fused_width, 0.0);
  for (std::size_t l = 0; l < dims.layers; ++l) {
    m.layers.emplace_back(dims.hidden_width, l == 0 ? dims.fused_width : dims.hidden_width);
  }
  m.classifier_weight.assign(dims.hidden_width, 0.0);
  return m;
}

GcnModel GcnModel::initialize(const ModelDims& dims, std::uint64_t seed) {
  GcnModel m = zeros(dims);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::span<double> block, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : block) v = dist(rng);
  };
  fill(m.encoder.weight.data, kStructuralInputs);
  fill(m.encoder.bias, kStructuralInputs);
  fill(m.fusion.weight.data, dims.struct_width + dims.embed_dim);
  fill(m.fusion.bias, dims.struct_width + dims.embed_dim);
  for (auto& w : m.layers) fill(w.data, w.cols);
  fill(m.classifier_weight, dims.hidden_width);
  fill(std::span<double>(&m.classifier_bias, 1), dims.hidden_width);
  return m;
}

void GcnModel::for_each_block(const std::function<void(std::span<double>)>& fn) {
  fn(encoder.weight.data);
  fn(encoder.bias);
  fn(fusion.weight.data);
  fn(fusion.bias);
  for (auto& w : layers) fn(w.data);
  fn(classifier_weight);
  fn(std::span<double>(&classifier_bias, 1));
}

void GcnModel::for_each_block(const std::function<void(std::span<const double>)>& fn) const {
  fn(encoder.weight.data);
  fn(encoder.bias);
  fn(fusion.weight.data);
  fn(fusion.bias);
  for (const auto& w : layers) fn(w.data);
  fn(classifier_weight);
  fn(std::span<const double>(&classifier_bias, 1));
}

std::size_t GcnModel::parameter_count() const {
  std::size_t n = 0;
  for_each_block([&](std::span<const double> b) { n += b.size(); });
  return n;
}

void GcnModel::check_shapes() const {
  dims.validate();
  auto expect = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("model shape mismatch: ") + what);
  };
  expect(encoder.weight.rows == dims.struct_width && encoder.weight.cols == kStructuralInputs, "encoder weight");
  expect(encoder.bias.size() == dims.struct_width, "encoder bias");
  expect(fusion.weight.rows == dims.fused_width && fusion.weight.cols == dims.struct_width + dims.embed_dim,
         "fusion weight");
  expect(fusion.bias.size() == dims.fused_width, "fusion bias");
  expect(layers.size() == dims.layers, "layer count");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    expect(layers[l].rows == dims.hidden_width &&
               layers[l].cols == (l == 0 ? dims.fused_width : dims.hidden_width),
           "graph convolution weight");
  }
  expect(classifier_weight.size() == dims.hidden_width, "classifier weight");
}

std::array<double, kStructuralInputs> structural_input(const NodeFeatures& x) {
  auto raw = x.as_array();
  std::array<double, kStructuralInputs> out{};
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::log1p(raw[i]);
  return out;
}

std::vector<double> encode_structural(const StructuralEncoder& enc, std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error("non-finite structural feature");
  }
  return affine(enc.weight, x, enc.bias);
}

std::vector<double> fuse(const FusionLayer& fl, std::span<const double> z, std::span<const double> e_hat) {
  if (z.size() + e_hat.size() != fl.weight.cols) {
    throw Error("dimension mismatch: fusion expects " + std::to_string(fl.weight.cols) + " inputs, got " +
                std::to_string(z.size() + e_hat.size()));
  }
  std::vector<double> concat(z.begin(), z.end());
  concat.insert(concat.end(), e_hat.begin(), e_hat.end());
  auto out = affine(fl.weight, concat, fl.bias);
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return out;
}

double sigmoid(double s) {
  double p;
  if (s >= 0) {
    p = 1.0 / (1.0 + std::exp(-s));
  } else {
    const double e = std::exp(s);
    p = e / (1.0 + e);
  }
  // Keep the output strictly inside (0,1) even when the exponential saturates.
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double classify(const GcnModel& m, std::span<const double> h) {
  return sigmoid(dot(m.classifier_weight, h) + m.classifier_bias);
}

NormalizedAdjacency NormalizedAdjacency::from_neighbors(const std::vector<std::vector<std::size_t>>& neighbors,
                                                        std::span<const std::size_t> degrees) {
  NormalizedAdjacency adj;
  const std::size_t n = neighbors.size();
  if (!degrees.empty() && degrees.size() != n) throw Error("degree list length mismatch");
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d = degrees.empty() ? neighbors[i].size() : degrees[i];
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(d + 1));
  }
  adj.offsets.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    adj.columns.push_back(i);
    adj.coefficients.push_back(inv_sqrt[i] * inv_sqrt[i]);
    for (std::size_t j : neighbors[i]) {
      if (j >= n || j == i) throw Error("invalid neighbour index in adjacency");
      adj.columns.push_back(j);
      adj.coefficients.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    adj.offsets.push_back(adj.columns.size());
  }
  return adj;
}

Matrix gcn_forward(const GcnModel& m, const NormalizedAdjacency& adj, const Matrix& fused) {
  if (fused.rows != adj.size()) throw Error("every node needs a fused feature vector");
  Matrix h = fused;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const Matrix& w = m.layers[l];
    if (h.cols != w.cols) throw Error("width mismatch across graph convolution layers");
    Matrix pre = propagate(adj, affine_rows(h, w));
    if (l + 1 < m.layers.size()) {
      relu_into(pre, h);
    } else {
      h = std::move(pre);  // last layer is linear
    }
  }
  return h;
}

ForwardPass forward(const GcnModel& m, const GraphBatch& batch) {
  const std::size_t n = batch.size();
  if (batch.structural.rows != n || batch.narrative.rows != n || batch.adjacency.size() != n) {
    throw Error("graph batch row counts disagree");
  }
  if (batch.structural.cols != kStructuralInputs) throw Error("dimension mismatch: structural inputs");
  if (batch.narrative.cols != m.dims.embed_dim) {
    throw Error("dimension mismatch: narrative width " + std::to_string(batch.narrative.cols) + " vs model " +
                std::to_string(m.dims.embed_dim));
  }
  for (double v : batch.structural.data) {
    if (!std::isfinite(v)) throw Error("non-finite structural feature");
  }

  ForwardPass fp;
  fp.z = affine_rows(batch.structural, m.encoder.weight, m.encoder.bias);
  const std::size_t dz = m.dims.struct_width;
  fp.concat = Matrix(n, dz + m.dims.embed_dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = fp.concat.row(i);
    std::copy_n(fp.z.row(i).begin(), dz, dst.begin());
    std::copy_n(batch.narrative.row(i).begin(), m.dims.embed_dim, dst.begin() + static_cast<std::ptrdiff_t>(dz));
  }
  fp.fused_pre = affine_rows(fp.concat, m.fusion.weight, m.fusion.bias);
  relu_into(fp.fused_pre, fp.fused);

  const Matrix* h = &fp.fused;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    fp.layer_pre.push_back(propagate(batch.adjacency, affine_rows(*h, m.layers[l])));
    if (l + 1 < m.layers.size()) {
      fp.hidden.emplace_back();
      relu_into(fp.layer_pre.back(), fp.hidden.back());
    } else {
      fp.hidden.push_back(fp.layer_pre.back());
    }
    h = &fp.hidden.back();
  }
  fp.logits.resize(n);
  fp.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fp.logits[i] = dot(m.classifier_weight, h->row(i)) + m.classifier_bias;
    fp.scores[i] = sigmoid(fp.logits[i]);
  }
  return fp;
}

LossValue bce_loss(std::span<const double> scores, std::span<const int> labels, double pos_weight) {
  if (scores.size() != labels.size()) throw Error("length mismatch between scores and labels");
  LossValue out;
  out.terms.reserve(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = std::clamp(scores[i], kScoreEpsilon, 1.0 - kScoreEpsilon);
    double term;
    if (labels[i] == 1) {
      term = -pos_weight * std::log(p);
    } else if (labels[i] == 0) {
      term = -std::log1p(-p);
    } else {
      throw Error("labels must be 0 or 1");
    }
    out.terms.push_back(term);
    sum += term;
  }
  out.value = scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
  return out;
}

namespace {

void labelled(const GraphBatch& batch, const ForwardPass& fp, std::vector<double>& scores, std::vector<int>& labels,
              std::vector<std::size_t>& rows) {
  for (const auto& ex : batch.examples) {
    if (ex.row >= batch.size()) throw Error("labelled row out of range");
    scores.push_back(fp.scores[ex.row]);
    labels.push_back(ex.label);
    rows.push_back(ex.row);
  }
  if (rows.empty()) throw Error("batch has no labelled examples");
}

}  // namespace

double batch_loss(const GcnModel& m, const GraphBatch& batch, double pos_weight) {
  auto fp = forward(m, batch);
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::size_t> rows;
  labelled(batch, fp, scores, labels, rows);
  return bce_loss(scores, labels, pos_weight).value;
}

GcnModel batch_gradient(const GcnModel& m, const GraphBatch& batch, double pos_weight, double* loss) {
  auto fp = forward(m, batch);
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::size_t> rows;
  labelled(batch, fp, scores, labels, rows);
  if (loss != nullptr) *loss = bce_loss(scores, labels, pos_weight).value;

  const std::size_t n = batch.size();
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  GcnModel grad = GcnModel::zeros(m.dims);

  // dL/dlogit; zero where the clamp is active.
  std::vector<double> dlogit(n, 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double p = scores[k];
    if (p < kScoreEpsilon || p > 1.0 - kScoreEpsilon) continue;
    dlogit[rows[k]] += (labels[k] == 1 ? -pos_weight * (1.0 - p) : p) * inv_m;
  }

  const Matrix& top = fp.hidden.back();
  Matrix dh(n, m.dims.hidden_width);
  for (std::size_t i = 0; i < n; ++i) {
    if (dlogit[i] == 0.0) continue;
    grad.classifier_bias += dlogit[i];
    for (std::size_t j = 0; j < m.dims.hidden_width; ++j) {
      grad.classifier_weight[j] += dlogit[i] * top(i, j);
      dh(i, j) = dlogit[i] * m.classifier_weight[j];
    }
  }

  for (std::size_t l = m.layers.size(); l-- > 0;) {
    if (l + 1 < m.layers.size()) mask_relu(dh, fp.layer_pre[l]);
    Matrix dt = propagate_transposed(batch.adjacency, dh);
    const Matrix& input = l == 0 ? fp.fused : fp.hidden[l - 1];
    accumulate_outer(dt, input, grad.layers[l]);
    dh = back_through(dt, m.layers[l]);
  }

  mask_relu(dh, fp.fused_pre);
  accumulate_outer(dh, fp.concat, grad.fusion.weight);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dh.cols; ++j) grad.fusion.bias[j] += dh(i, j);
  }
  Matrix dconcat = back_through(dh, m.fusion.weight);
  Matrix dz(n, m.dims.struct_width);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m.dims.struct_width; ++j) {
      dz(i, j) = dconcat(i, j);
      grad.encoder.bias[j] += dz(i, j);
    }
  }
  accumulate_outer(dz, batch.structural, grad.encoder.weight);
  return grad;
}

double relu_margin(const GcnModel& m, const GraphBatch& batch) {
  auto fp = forward(m, batch);
  double margin = std::numeric_limits<double>::infinity();
  for (double v : fp.fused_pre.data) margin = std::min(margin, std::abs(v));
  for (std::size_t l = 0; l + 1 < fp.layer_pre.size(); ++l) {
    for (double v : fp.layer_pre[l].data) margin = std::min(margin, std::abs(v));
  }
  return margin;
}

}  // namespace aml
