#include "amlgraph/pipeline.hpp"

#include <chrono>

#include "amlgraph/checkpoint.hpp"

namespace aml {

namespace {

constexpr std::size_t kAlertFlushBatch = 64;
constexpr std::size_t kNarrativeCacheLimit = 1 << 16;

// Retrieval query used when neither the narrative nor any red flag embeds to
// a non-zero vector, so every flagged transaction still gets grounded.
constexpr const char* kGenericQuery = "suspicious transaction reporting obligation";

}  // namespace

nlohmann::json to_json(const Alert& a) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : a.clauses) {
    clauses.push_back({{"clause_id", c.clause_id}, {"source", c.source}, {"similarity", c.similarity}});
  }
  return {{"seq", a.seq},
          {"tx_id", a.tx_id},
          {"score", a.score},
          {"clauses", clauses},
          {"explanation", a.explanation},
          {"generator", std::string(to_string(a.generator))}};
}

Alert alert_from_json(const nlohmann::json& j) {
  Alert a;
  try {
    a.seq = j.at("seq").get<std::uint64_t>();
    a.tx_id = j.at("tx_id").get<std::string>();
    a.score = j.at("score").get<double>();
    for (const auto& c : j.at("clauses")) {
      a.clauses.push_back(
          {c.at("clause_id").get<std::string>(), c.at("source").get<std::string>(), c.at("similarity").get<double>()});
    }
    a.explanation = j.at("explanation").get<std::string>();
    const auto gen = j.at("generator").get<std::string>();
    if (gen != "template" && gen != "external") throw Error("unknown generator '" + gen + "'");
    a.generator = gen == "external" ? Generator::External : Generator::Template;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed alert record: ") + e.what());
  }
  return a;
}

Monitor::Monitor(PipelineConfig cfg, GcnModel model, ClauseIndex index, Embedder embedder)
    : cfg_(std::move(cfg)),
      model_(std::move(model)),
      index_(std::move(index)),
      embedder_(std::move(embedder)),
      graph_(DecayParams{cfg_.alpha}, cfg_.window_horizon) {
  cfg_.validate();
  model_.check_shapes();
  require_embedding_dim(model_, embedder_.dimension());
  if (index_.dimension() != embedder_.dimension()) {
    throw Error("dimension mismatch: clause index width " + std::to_string(index_.dimension()) + " vs embedder " +
                std::to_string(embedder_.dimension()));
  }
  if (index_.signature() != embedder_signature(embedder_)) {
    throw Error("embedder mismatch: clause index built with " + index_.signature() + ", pipeline uses " +
                embedder_signature(embedder_));
  }
}

SharedEmbedding Monitor::narrative_embedding(const std::string& text) {
  if (auto it = narrative_cache_.find(text); it != narrative_cache_.end()) return it->second;
  if (narrative_cache_.size() >= kNarrativeCacheLimit) narrative_cache_.clear();
  auto e = std::make_shared<const std::vector<double>>(normalize_or_zero(embedder_.embed(text)).values);
  narrative_cache_.emplace(text, e);
  return e;
}

EmbeddingVector Monitor::generic_query() const {
  try {
    auto e = embedder_.embed(kGenericQuery);
    if (!e.is_zero()) return normalize(e);
  } catch (const Error&) {
  }
  // An external table without the generic text: anchor on the first clause.
  return EmbeddingVector{index_.entries().front().embedding, true};
}

ScoredTransaction Monitor::process(const Transaction& tx) {
  graph_.insert(tx, narrative_embedding(tx.narrative));
  graph_.prune();
  if (++inserted_ % cfg_.betweenness_interval == 0) {
    betweenness_ = betweenness_all(graph_, cfg_.betweenness_samples, cfg_.train.seed);
  }

  const NodeIndex sender = graph_.require(tx.sender);
  GraphBatch ego = ego_batch(graph_, sender, model_.dims.layers, betweenness_, embedder_);
  ForwardPass fp = forward(model_, ego);

  ScoredTransaction out{tx.tx_id, fp.scores[0], std::nullopt};
  if (!(out.score > cfg_.threshold)) return out;

  const NodeFeatures features = node_structural_features(graph_, sender, betweenness_);
  EmbeddingVector query;
  try {
    query = query_embedding(tx, features, embedder_, cfg_.red_flags);
  } catch (const Error&) {
    query = generic_query();
  }
  const RetrievalResult retrieved = query_top_k(index_, query.values, cfg_.top_k);

  AlertContext ctx{tx, out.score, cfg_.threshold, features, grounding_clauses(index_, retrieved), cfg_.red_flags};
  Explanation ex = cfg_.external.endpoint.empty() ? render_explanation(ctx) : external_generate(cfg_.external, ctx);

  Alert alert;
  alert.seq = next_seq_++;
  alert.tx_id = tx.tx_id;
  alert.score = out.score;
  for (const auto& c : ctx.clauses) alert.clauses.push_back({c.clause_id, c.source, c.similarity});
  alert.explanation = std::move(ex.text);
  alert.generator = ex.generator;
  out.alert = std::move(alert);
  return out;
}

double offline_score(const GcnModel& model, const TransactionGraph& graph, const BetweennessMap& bet,
                     const Embedder& emb, const std::string& sender) {
  GraphBatch batch = full_batch(graph, bet, emb);
  ForwardPass fp = forward(model, batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.node_ids[i] == sender) return fp.scores[i];
  }
  throw Error("unknown node: " + sender);
}

MonitorResult run_monitor(const PipelineConfig& cfg, const std::vector<Transaction>& stream, const GcnModel& model,
                          const ClauseIndex& index, const Embedder& emb, const AlertCallback& on_alert) {
  Monitor monitor(cfg, model, index, emb);
  MonitorResult result;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& tx : stream) {
    ++result.processed;
    ScoredTransaction scored;
    try {
      scored = monitor.process(tx);
    } catch (const StaleTransaction&) {
      ++result.rejected;
      continue;
    }
    if (scored.alert) {
      if (on_alert) on_alert(*scored.alert);
      result.alerts.push_back(*scored.alert);
    }
    result.scored.push_back(std::move(scored));
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

AlertWriter::AlertWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw Error("cannot open alert sink: " + path.string());
}

void AlertWriter::write(const Alert& a) {
  out_ << to_json(a).dump() << '\n';
  ++count_;
  if (++pending_ >= kAlertFlushBatch) flush();
  if (!out_) throw Error("write failed: " + path_.string());
}

void AlertWriter::flush() {
  out_.flush();
  pending_ = 0;
  if (!out_) throw Error("write failed: " + path_.string());
}

std::size_t emit_alerts(const std::vector<Alert>& alerts, const std::filesystem::path& sink) {
  AlertWriter writer(sink);
  for (const auto& a : alerts) writer.write(a);
  writer.flush();
  return writer.count();
}

std::vector<Alert> read_alerts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open alerts file: " + path.string());
  std::vector<Alert> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error("malformed alert line in " + path.string());
    out.push_back(alert_from_json(j));
  }
  return out;
}

std::vector<NodeExample> sender_examples(const std::vector<Transaction>& txs) {
  std::vector<NodeExample> out;
  for (const auto& tx : txs) {
    if (tx.label == Label::Unknown) continue;
    out.emplace_back(tx.sender, tx.label == Label::Illicit ? 1 : 0);
  }
  return out;
}

TransactionGraph replay_graph(const PipelineConfig& cfg, const std::vector<Transaction>& txs, const Embedder* emb) {
  TransactionGraph graph(DecayParams{cfg.alpha}, cfg.window_horizon);
  std::unordered_map<std::string, SharedEmbedding> cache;
  for (const auto& tx : txs) {
    SharedEmbedding e;
    if (emb != nullptr) {
      auto it = cache.find(tx.narrative);
      if (it == cache.end()) {
        it = cache.emplace(tx.narrative,
                           std::make_shared<const std::vector<double>>(normalize_or_zero(emb->embed(tx.narrative)).values))
                 .first;
      }
      e = it->second;
    }
    try {
      graph.insert(tx, e);
    } catch (const StaleTransaction&) {
      continue;
    }
    graph.prune();
  }
  return graph;
}

TrainingOutcome train_on_stream(const PipelineConfig& cfg, const std::vector<Transaction>& stream,
                                const Embedder& emb) {
  cfg.validate();
  if (emb.dimension() != cfg.model.embed_dim) throw Error("dimension mismatch: embedder vs model");
  TrainingOutcome out;
  out.split = chronological_split(stream, cfg.train_ratio);
  TransactionGraph graph = replay_graph(cfg, out.split.train, &emb);
  if (graph.node_count() == 0) throw Error("degenerate labels: empty training graph");
  out.betweenness = betweenness_all(graph, cfg.betweenness_samples, cfg.train.seed);
  const auto examples = sender_examples(out.split.train);
  out.batch = full_batch(graph, out.betweenness, emb, &examples);
  out.result = fit(cfg.model, out.batch, cfg.train);

  ForwardPass fp = forward(out.result.model, out.batch);
  std::size_t tp = 0, fp_count = 0, tn = 0, fn = 0;
  for (const auto& ex : out.batch.examples) {
    const bool flagged = fp.scores[ex.row] > cfg.threshold;
    if (ex.label == 1) {
      (flagged ? tp : fn)++;
    } else {
      (flagged ? fp_count : tn)++;
    }
  }
  out.train_metrics = metrics_from_counts(tp, fp_count, tn, fn);
  return out;
}

}  // namespace aml
