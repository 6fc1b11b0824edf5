#include "amlgraph/training.hpp"

#include <algorithm>
#include <cmath>

namespace aml {

std::string_view to_string(Optimizer o) {
  return o == Optimizer::Momentum ? "momentum" : "gradient-descent";
}

Optimizer optimizer_from_string(std::string_view s) {
  if (s == "momentum") return Optimizer::Momentum;
  if (s == "gradient-descent" || s == "plain-gradient-descent") return Optimizer::GradientDescent;
  throw Error("unknown optimizer: " + std::string(s));
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error("learning rate must be >= 0");
  if (!(pos_weight >= 1.0)) throw Error("positive-class weight must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("momentum must lie in [0,1)");
}

TrainResult fit(GcnModel initial, const GraphBatch& batch, const TrainConfig& cfg) {
  cfg.validate();
  initial.check_shapes();
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& ex : batch.examples) {
    has_pos = has_pos || ex.label == 1;
    has_neg = has_neg || ex.label == 0;
  }
  if (!has_pos || !has_neg) throw Error("degenerate labels: training needs both illicit and licit examples");

  TrainResult result{std::move(initial), {}};
  result.loss_history.reserve(cfg.epochs);
  GcnModel velocity = GcnModel::zeros(result.model.dims);
  const double mu = cfg.optimizer == Optimizer::Momentum ? cfg.momentum : 0.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0.0;
    GcnModel grad = batch_gradient(result.model, batch, cfg.pos_weight, &loss);
    result.loss_history.push_back(loss);

    std::vector<std::span<double>> params;
    std::vector<std::span<double>> vel;
    std::vector<std::span<double>> grads;
    result.model.for_each_block([&](std::span<double> b) { params.push_back(b); });
    velocity.for_each_block([&](std::span<double> b) { vel.push_back(b); });
    grad.for_each_block([&](std::span<double> b) { grads.push_back(b); });
    for (std::size_t b = 0; b < params.size(); ++b) {
      for (std::size_t i = 0; i < params[b].size(); ++i) {
        vel[b][i] = mu * vel[b][i] + grads[b][i];
        params[b][i] -= cfg.learning_rate * vel[b][i];
      }
    }
  }
  return result;
}

TrainResult fit(const ModelDims& dims, const GraphBatch& batch, const TrainConfig& cfg) {
  return fit(GcnModel::initialize(dims, cfg.seed), batch, cfg);
}

GradientCheckResult gradient_check(const GcnModel& m, const GraphBatch& batch, double pos_weight, double step) {
  GradientCheckResult result;
  result.relu_margin = relu_margin(m, batch);
  GcnModel analytic = batch_gradient(m, batch, pos_weight);
  std::vector<std::span<const double>> grads;
  std::as_const(analytic).for_each_block([&](std::span<const double> b) { grads.push_back(b); });

  GcnModel probe = m;
  std::vector<std::span<double>> params;
  probe.for_each_block([&](std::span<double> b) { params.push_back(b); });

  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double original = params[b][i];
      params[b][i] = original + step;
      const double up = batch_loss(probe, batch, pos_weight);
      params[b][i] = original - step;
      const double down = batch_loss(probe, batch, pos_weight);
      params[b][i] = original;

      const double numeric = (up - down) / (2.0 * step);
      const double a = grads[b][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
      result.max_abs_gradient = std::max(result.max_abs_gradient, std::abs(a));
      ++result.parameters_checked;
    }
  }
  return result;
}

}  // namespace aml
