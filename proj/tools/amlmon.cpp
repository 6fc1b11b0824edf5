// amlmon: command-line driver for the transaction-monitoring engine.
//
// Every subcommand prints one JSON document on stdout; diagnostics go to
// stderr. Exit status is 0 on success, 1 on any failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "amlgraph/checkpoint.hpp"
#include "amlgraph/config.hpp"
#include "amlgraph/pipeline.hpp"
#include "amlgraph/random_instances.hpp"
#include "amlgraph/synthetic.hpp"
#include "amlgraph/training.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> theta;
  std::optional<std::size_t> top_k;
};

aml::PipelineConfig effective_config(const std::string& path, const Overrides& o) {
  aml::PipelineConfig cfg = path.empty() ? aml::PipelineConfig{} : aml::load_config(path);
  if (o.seed) {
    cfg.train.seed = *o.seed;
    cfg.synthetic.seed = *o.seed;
  }
  if (o.theta) cfg.threshold = *o.theta;
  if (o.top_k) cfg.top_k = *o.top_k;
  if (const char* token = std::getenv("EXPLAIN_API_TOKEN")) cfg.external.token = token;
  cfg.validate();
  return cfg;
}

aml::ClauseIndex load_rules(const fs::path& path, const aml::Embedder& emb) {
  if (path.extension() == ".jsonl") return aml::build_index(aml::load_corpus(path), emb);
  return aml::load_index(path);
}

void print(const json& doc) { std::cout << doc.dump(2) << std::endl; }

int cmd_generate(const aml::PipelineConfig& cfg, const std::string& out) {
  auto txs = aml::generate_synthetic(cfg.synthetic);
  aml::write_transactions_file(out, txs);
  std::size_t illicit = 0;
  for (const auto& tx : txs) illicit += tx.label == aml::Label::Illicit;
  print({{"command", "generate"},
         {"output", out},
         {"transactions", txs.size()},
         {"illicit", illicit},
         {"config", aml::to_json(cfg)}});
  return 0;
}

int cmd_train(const aml::PipelineConfig& cfg, const std::string& data, const std::string& checkpoint) {
  auto stream = aml::read_transactions_file(data);
  auto emb = aml::make_embedder(cfg.embedder);
  std::cerr << "training on " << stream.size() << " transactions (" << cfg.train.epochs << " epochs)\n";
  auto outcome = aml::train_on_stream(cfg, stream, emb);
  aml::save_checkpoint(outcome.result.model, checkpoint);
  print({{"command", "train"},
         {"checkpoint", checkpoint},
         {"split",
          {{"train", outcome.split.train.size()},
           {"test", outcome.split.test.size()},
           {"boundary_timestamp", outcome.split.boundary}}},
         {"training_nodes", outcome.batch.size()},
         {"loss_history", outcome.result.loss_history},
         {"final_loss", outcome.result.loss_history.empty() ? json(nullptr) : json(outcome.result.loss_history.back())},
         {"train_metrics", outcome.train_metrics.to_json()},
         {"config", aml::to_json(cfg)}});
  return 0;
}

int cmd_index_rules(const aml::PipelineConfig& cfg, const std::string& rules, const std::string& out) {
  auto emb = aml::make_embedder(cfg.embedder);
  auto index = aml::build_index(aml::load_corpus(rules), emb);
  aml::save_index(index, out);
  print({{"command", "index-rules"},
         {"output", out},
         {"clauses", index.size()},
         {"dimension", index.dimension()},
         {"embedder", index.signature()},
         {"config", aml::to_json(cfg)}});
  return 0;
}

int cmd_monitor(const aml::PipelineConfig& cfg, const std::string& checkpoint, const std::string& rules,
                const std::string& data, const std::string& alerts_out, const std::string& scores_out) {
  // Every artifact is loaded and cross-checked before the stream is touched.
  auto emb = aml::make_embedder(cfg.embedder);
  auto model = aml::load_checkpoint(checkpoint);
  aml::require_embedding_dim(model, emb.dimension());
  if (!(model.dims == cfg.model)) throw aml::Error("dimension mismatch: checkpoint and config model dimensions differ");
  auto index = load_rules(rules, emb);
  aml::Monitor probe(cfg, model, index, emb);

  auto stream = aml::read_transactions_file(data);
  aml::AlertWriter writer(alerts_out);
  auto result = aml::run_monitor(cfg, stream, model, index, emb, [&](const aml::Alert& a) { writer.write(a); });
  writer.flush();

  if (!scores_out.empty()) {
    std::ofstream out(scores_out, std::ios::trunc);
    if (!out) throw aml::Error("cannot write scores: " + scores_out);
    for (const auto& s : result.scored) out << json{{"tx_id", s.tx_id}, {"score", s.score}}.dump() << '\n';
  }
  const double tps = result.seconds > 0 ? static_cast<double>(result.processed) / result.seconds : 0.0;
  print({{"command", "monitor"},
         {"transactions", result.processed},
         {"scored", result.scored.size()},
         {"rejected", result.rejected},
         {"alerts", writer.count()},
         {"seconds", result.seconds},
         {"throughput_tps", tps},
         {"alerts_out", alerts_out},
         {"config", aml::to_json(cfg)}});
  return 0;
}

int cmd_evaluate(const std::string& scores_path, const std::string& labels_path, double theta,
                 std::optional<double> holdout) {
  std::unordered_map<std::string, double> predictions;
  std::ifstream in(scores_path);
  if (!in) throw aml::Error("cannot open scores: " + scores_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("tx_id") || !j.contains("score")) {
      throw aml::Error("malformed score line in " + scores_path);
    }
    predictions[j["tx_id"].get<std::string>()] = j["score"].get<double>();
  }
  auto txs = aml::read_transactions_file(labels_path);
  if (holdout) txs = aml::chronological_split(txs, *holdout).test;
  auto labels = aml::transaction_labels(txs);
  auto metrics = aml::evaluate(predictions, labels, theta);
  json report{{"command", "evaluate"}, {"theta", theta}, {"evaluated", metrics.total()}, {"metrics", metrics.to_json()}};
  if (holdout) report["holdout_ratio"] = *holdout;
  print(report);
  return 0;
}

int cmd_gradient_check(std::uint64_t seed, std::size_t instances) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::size_t checked = 0;
  json runs = json::array();
  while (checked < instances) {
    auto dims = aml::random_small_dims(8, 3, rng);
    std::uniform_int_distribution<std::size_t> nodes(2, 6);
    auto batch = aml::random_batch(nodes(rng), dims.embed_dim, 0.5, rng);
    auto model = aml::GcnModel::initialize(dims, rng());
    if (aml::relu_margin(model, batch) < 1e-3) continue;  // too close to a ReLU kink
    auto r = aml::gradient_check(model, batch);
    worst = std::max(worst, r.max_relative_error);
    runs.push_back({{"nodes", batch.size()}, {"parameters", r.parameters_checked}, {"max_relative_error", r.max_relative_error}});
    ++checked;
  }
  print({{"command", "gradient-check"}, {"instances", checked}, {"max_relative_error", worst}, {"runs", runs}});
  return worst < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amlmon: graph + narrative transaction monitoring"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  std::uint64_t seed = 0;
  double theta = 0.5;
  std::size_t top_k = 3;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "override every seed");
  auto* theta_opt = app.add_option("--theta", theta, "override the alert threshold");
  auto* topk_opt = app.add_option("--top-k", top_k, "override the number of retrieved clauses");

  std::string out, data, checkpoint, rules, alerts_out, scores_out;
  std::size_t instances = 20;
  std::optional<double> holdout;

  auto* gen = app.add_subcommand("generate", "write a seeded synthetic transaction stream");
  gen->add_option("--out", out, "output JSONL")->required();

  auto* train = app.add_subcommand("train", "chronological split + full-batch training");
  train->add_option("--data", data, "transaction JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--checkpoint", checkpoint, "checkpoint to write")->required();

  auto* index = app.add_subcommand("index-rules", "embed a regulatory clause corpus");
  index->add_option("--rules", rules, "clause corpus JSONL")->required()->check(CLI::ExistingFile);
  index->add_option("--out", out, "index file to write")->required();

  auto* monitor = app.add_subcommand("monitor", "score a stream and emit grounded alerts");
  monitor->add_option("--checkpoint", checkpoint, "trained checkpoint")->required()->check(CLI::ExistingFile);
  monitor->add_option("--rules", rules, "index file, or clause corpus .jsonl")->required()->check(CLI::ExistingFile);
  monitor->add_option("--data", data, "transaction JSONL")->required()->check(CLI::ExistingFile);
  monitor->add_option("--alerts-out", alerts_out, "alert JSONL to write")->required();
  monitor->add_option("--scores-out", scores_out, "optional per-transaction score JSONL");

  auto* evaluate = app.add_subcommand("evaluate", "precision/recall/F1 of scores against labels");
  evaluate->add_option("--scores", out, "score JSONL ({tx_id, score} per line)")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data, "labelled transaction JSONL")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--holdout-ratio", holdout, "evaluate only the chronological tail after this train ratio");

  auto* gradcheck = app.add_subcommand("gradient-check", "finite-difference check of every gradient");
  gradcheck->add_option("--instances", instances, "random instances to check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seed_opt) overrides.seed = seed;
    if (*theta_opt) overrides.theta = theta;
    if (*topk_opt) overrides.top_k = top_k;
    const aml::PipelineConfig cfg = effective_config(config_path, overrides);

    if (*gen) return cmd_generate(cfg, out);
    if (*train) return cmd_train(cfg, data, checkpoint);
    if (*index) return cmd_index_rules(cfg, rules, out);
    if (*monitor) return cmd_monitor(cfg, checkpoint, rules, data, alerts_out, scores_out);
    if (*evaluate) return cmd_evaluate(out, data, cfg.threshold, holdout);
    if (*gradcheck) return cmd_gradient_check(cfg.train.seed, instances);
  } catch (const std::exception& e) {
    std::cerr << "amlmon: error: " << e.what() << std::endl;
    return 1;
  }
  return 1;
}
