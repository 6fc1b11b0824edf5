#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amlgraph/model.hpp"

namespace aml {

enum class Optimizer { GradientDescent, Momentum };

std::string_view to_string(Optimizer o);
Optimizer optimizer_from_string(std::string_view s);

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 200;
  double pos_weight = 1.0;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::Momentum;
  double momentum = 0.9;

  void validate() const;
};

struct TrainResult {
  GcnModel model;
  std::vector<double> loss_history;  // loss before each epoch's update
};

/// Full-batch training on the labelled rows of `batch`, starting from `initial`.
/// Throws Error("degenerate labels") unless both classes are present.
TrainResult fit(GcnModel initial, const GraphBatch& batch, const TrainConfig& cfg);

/// Same, starting from GcnModel::initialize(dims, cfg.seed).
TrainResult fit(const ModelDims& dims, const GraphBatch& batch, const TrainConfig& cfg);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  double max_abs_gradient = 0.0;
  std::size_t parameters_checked = 0;
  double relu_margin = 0.0;
};

/// Compares batch_gradient against central differences for every parameter.
/// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradientCheckResult gradient_check(const GcnModel& m, const GraphBatch& batch, double pos_weight = 1.0,
                                   double step = 1e-5);

}  // namespace aml
