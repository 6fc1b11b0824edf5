#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "amlgraph/graph.hpp"
#include "amlgraph/embedding.hpp"
#include "amlgraph/matrix.hpp"

namespace aml {

inline constexpr std::size_t kStructuralInputs = 4;
inline constexpr double kScoreEpsilon = 1e-7;

struct ModelDims {
  std::size_t struct_width = 16;  // d'
  std::size_t embed_dim = 64;     // D
  std::size_t fused_width = 32;   // F
  std::size_t hidden_width = 32;  // H
  std::size_t layers = 3;         // L

  void validate() const;
  bool operator==(const ModelDims&) const = default;
};

struct StructuralEncoder {
  Matrix weight;  // d' x 4
  std::vector<double> bias;

  bool operator==(const StructuralEncoder&) const = default;
};

struct FusionLayer {
  Matrix weight;  // F x (d' + D)
  std::vector<double> bias;

  bool operator==(const FusionLayer&) const = default;
};

/// Full parameter set: structural encoder, fusion layer, L graph-convolution
/// weights (no bias) and the logistic classifier head.
struct GcnModel {
  ModelDims dims;
  StructuralEncoder encoder;
  FusionLayer fusion;
  std::vector<Matrix> layers;  // layer 0: H x F, later: H x H
  std::vector<double> classifier_weight;
  double classifier_bias = 0.0;

  static GcnModel zeros(const ModelDims& dims);
  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases alike.
  static GcnModel initialize(const ModelDims& dims, std::uint64_t seed);

  /// Visits every parameter block in checkpoint order.
  void for_each_block(const std::function<void(std::span<double>)>& fn);
  void for_each_block(const std::function<void(std::span<const double>)>& fn) const;
  std::size_t parameter_count() const;

  /// Throws Error when shapes disagree with `dims`.
  void check_shapes() const;

  bool operator==(const GcnModel&) const = default;
};

/// log1p of each raw feature. Degrees, path counts and frequencies span
/// several orders of magnitude; the encoder sees them on a log scale.
std::array<double, kStructuralInputs> structural_input(const NodeFeatures& x);

/// z = W_s x + b_s. Throws Error on non-finite input.
std::vector<double> encode_structural(const StructuralEncoder& enc, std::span<const double> x);

/// ReLU(W_f [z || e_hat] + b_f).
std::vector<double> fuse(const FusionLayer& fl, std::span<const double> z, std::span<const double> e_hat);

double sigmoid(double s);

/// sigmoid(w_c . h + b_c).
double classify(const GcnModel& m, std::span<const double> h);

/// Self-looped, symmetric-normalized adjacency in CSR form. Row i lists the
/// node itself and its distinct neighbours with coefficient 1/sqrt(d_i d_j),
/// where d counts distinct neighbours plus the self-loop.
struct NormalizedAdjacency {
  std::vector<std::size_t> offsets;  // size n+1
  std::vector<std::size_t> columns;
  std::vector<double> coefficients;

  std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }

  /// Builds from undirected neighbour lists (self excluded). `degrees`, when
  /// given, overrides the list sizes as neighbour counts; ego batches use it
  /// for boundary rows whose lists are truncated.
  static NormalizedAdjacency from_neighbors(const std::vector<std::vector<std::size_t>>& neighbors,
                                            std::span<const std::size_t> degrees = {});
};

/// One loss term: the score of `row` should match `label` (1 illicit, 0 licit).
/// A row may appear many times, once per labelled transaction it sent.
struct LabelledRow {
  std::size_t row = 0;
  int label = 0;
};

/// Everything the network consumes for a set of nodes.
struct GraphBatch {
  std::vector<std::string> node_ids;
  Matrix structural;  // n x 4, already passed through structural_input
  Matrix narrative;   // n x D, normalized or zero rows
  NormalizedAdjacency adjacency;
  std::vector<LabelledRow> examples;

  std::size_t size() const { return node_ids.size(); }
};

/// Graph-convolution stack over fused node features; ReLU between layers, last layer linear.
Matrix gcn_forward(const GcnModel& m, const NormalizedAdjacency& adj, const Matrix& fused);

struct ForwardPass {
  Matrix z;          // n x d'
  Matrix concat;     // n x (d' + D)
  Matrix fused_pre;  // n x F
  Matrix fused;      // n x F
  std::vector<Matrix> layer_pre;  // per layer, n x H
  std::vector<Matrix> hidden;     // per layer output, n x H
  std::vector<double> logits;
  std::vector<double> scores;
};

ForwardPass forward(const GcnModel& m, const GraphBatch& batch);

struct LossValue {
  double value = 0.0;
  std::vector<double> terms;
};

/// Mean binary cross-entropy; scores are clamped to [eps, 1-eps] first and
/// positive terms are scaled by pos_weight.
LossValue bce_loss(std::span<const double> scores, std::span<const int> labels, double pos_weight);

/// Mean loss over `batch.examples`.
double batch_loss(const GcnModel& m, const GraphBatch& batch, double pos_weight);

/// Analytic gradient of batch_loss with respect to every parameter, returned
/// in a GcnModel-shaped container.
GcnModel batch_gradient(const GcnModel& m, const GraphBatch& batch, double pos_weight, double* loss = nullptr);

/// Smallest |pre-activation| over every ReLU for the labelled computation.
double relu_margin(const GcnModel& m, const GraphBatch& batch);

}  // namespace aml
