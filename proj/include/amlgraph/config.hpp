#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "amlgraph/embedding.hpp"
#include "amlgraph/explain.hpp"
#include "amlgraph/model.hpp"
#include "amlgraph/red_flags.hpp"
#include "amlgraph/synthetic.hpp"
#include "amlgraph/training.hpp"

namespace aml {

struct EmbedderConfig {
  std::string kind = "hashing";  // "hashing" | "external-table"
  std::size_t dimension = kDefaultEmbeddingDim;
  std::string table;             // JSONL path for external-table
};

Embedder make_embedder(const EmbedderConfig& cfg);

struct PipelineConfig {
  double alpha = 1e-5;                  // decay per second
  double threshold = 0.5;
  std::size_t top_k = 3;
  std::size_t betweenness_interval = 500;
  std::optional<std::size_t> betweenness_samples;  // exact when unset
  double window_horizon = 30.0 * 86400.0;          // seconds
  double train_ratio = 0.8;
  EmbedderConfig embedder;
  ModelDims model;
  TrainConfig train;
  RedFlagRules red_flags;
  ExternalGeneratorConfig external;
  SyntheticConfig synthetic;

  void validate() const;
};

/// Every key is optional; unknown keys are rejected so typos surface early.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace aml
