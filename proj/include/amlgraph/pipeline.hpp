#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "amlgraph/betweenness.hpp"
#include "amlgraph/config.hpp"
#include "amlgraph/explain.hpp"
#include "amlgraph/features.hpp"
#include "amlgraph/metrics.hpp"
#include "amlgraph/retrieval.hpp"
#include "amlgraph/training.hpp"

namespace aml {

struct AlertClause {
  std::string clause_id;
  std::string source;
  double similarity = 0.0;

  bool operator==(const AlertClause&) const = default;
};

struct Alert {
  std::uint64_t seq = 0;
  std::string tx_id;
  double score = 0.0;
  std::vector<AlertClause> clauses;
  std::string explanation;
  Generator generator = Generator::Template;

  bool operator==(const Alert&) const = default;
};

nlohmann::json to_json(const Alert& a);
Alert alert_from_json(const nlohmann::json& j);

/// Per-transaction outcome of one monitoring step.
struct ScoredTransaction {
  std::string tx_id;
  double score = 0.0;
  std::optional<Alert> alert;
};

/// Online engine: one transaction at a time, single writer.
///
/// Each step inserts the transaction, prunes the window, refreshes
/// betweenness every `betweenness_interval` insertions, scores the sender on
/// its L-hop neighbourhood, and for score > threshold retrieves clauses and
/// renders an explanation.
class Monitor {
 public:
  /// Fails fast on any dimension inconsistency between config, model,
  /// embedder, and index.
  Monitor(PipelineConfig cfg, GcnModel model, ClauseIndex index, Embedder embedder);

  /// Throws StaleTransaction for transactions outside the window.
  ScoredTransaction process(const Transaction& tx);

  const TransactionGraph& graph() const noexcept { return graph_; }
  const BetweennessMap& betweenness() const noexcept { return betweenness_; }
  const GcnModel& model() const noexcept { return model_; }
  const Embedder& embedder() const noexcept { return embedder_; }
  std::uint64_t alerts_emitted() const noexcept { return next_seq_; }

 private:
  SharedEmbedding narrative_embedding(const std::string& text);
  EmbeddingVector generic_query() const;

  PipelineConfig cfg_;
  GcnModel model_;
  ClauseIndex index_;
  Embedder embedder_;
  TransactionGraph graph_;
  BetweennessMap betweenness_;
  std::size_t inserted_ = 0;
  std::uint64_t next_seq_ = 0;
  std::unordered_map<std::string, SharedEmbedding> narrative_cache_;
};

/// Score of the sender of a just-inserted transaction, recomputed from the
/// whole frozen graph (not the neighbourhood). Used to audit online scores.
double offline_score(const GcnModel& model, const TransactionGraph& graph, const BetweennessMap& bet,
                     const Embedder& emb, const std::string& sender);

struct MonitorResult {
  std::vector<Alert> alerts;
  std::vector<ScoredTransaction> scored;  // one per accepted transaction, stream order
  std::size_t processed = 0;
  std::size_t rejected = 0;  // stale transactions
  double seconds = 0.0;
};

using AlertCallback = std::function<void(const Alert&)>;

/// Runs the monitor over a whole stream; `on_alert` sees alerts in emission order.
MonitorResult run_monitor(const PipelineConfig& cfg, const std::vector<Transaction>& stream, const GcnModel& model,
                          const ClauseIndex& index, const Embedder& emb, const AlertCallback& on_alert = {});

/// Streams alerts as JSONL, one per line, flushing after every batch.
class AlertWriter {
 public:
  explicit AlertWriter(const std::filesystem::path& path);
  void write(const Alert& a);
  void flush();
  std::size_t count() const noexcept { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t count_ = 0;
  std::size_t pending_ = 0;
};

/// Writes every alert (creating an empty file for none); returns the count.
std::size_t emit_alerts(const std::vector<Alert>& alerts, const std::filesystem::path& sink);
std::vector<Alert> read_alerts(const std::filesystem::path& path);

/// One training example per labelled transaction: its sender with the
/// transaction's label (transactions are scored on their sender's state).
/// Unknown-labelled transactions are skipped.
std::vector<NodeExample> sender_examples(const std::vector<Transaction>& txs);

struct TrainingOutcome {
  ChronologicalSplit split;
  TrainResult result;
  GraphBatch batch;
  BetweennessMap betweenness;
  Metrics train_metrics;  // per training example, on the training snapshot
};

/// Chronological split, replay of the training portion into a windowed graph,
/// exact betweenness on that snapshot, and full-batch fit.
TrainingOutcome train_on_stream(const PipelineConfig& cfg, const std::vector<Transaction>& stream,
                                const Embedder& emb);

/// Builds the windowed graph for `txs` as the monitor would (insert + prune).
TransactionGraph replay_graph(const PipelineConfig& cfg, const std::vector<Transaction>& txs, const Embedder* emb);

}  // namespace aml
