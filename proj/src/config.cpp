#include "amlgraph/config.hpp"

#include <fstream>
#include <set>

namespace aml {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error("config section '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw Error("unknown config key '" + where + (where.empty() ? "" : ".") + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) {
    try {
      dst = it->get<T>();
    } catch (const json::exception& e) {
      throw Error(std::string("config key '") + key + "' has the wrong type: " + e.what());
    }
  }
}

}  // namespace

Embedder make_embedder(const EmbedderConfig& cfg) {
  if (cfg.kind == "hashing") return Embedder::hashing(cfg.dimension);
  if (cfg.kind == "external-table") {
    if (cfg.table.empty()) throw Error("external-table embedder needs embedder.table");
    return load_external_table(cfg.table, cfg.dimension);
  }
  throw Error("unknown embedder kind: " + cfg.kind);
}

void PipelineConfig::validate() const {
  if (!(threshold >= 0.0 && threshold < 1.0)) throw Error("threshold must lie in [0,1)");
  if (top_k == 0) throw Error("top_k must be >= 1");
  if (betweenness_interval == 0) throw Error("betweenness_interval must be >= 1");
  if (betweenness_samples && *betweenness_samples == 0) throw Error("betweenness_samples must be >= 1");
  if (!(alpha >= 0)) throw Error("alpha must be >= 0");
  if (!(window_horizon > 0)) throw Error("window_horizon must be positive");
  if (!(train_ratio > 0 && train_ratio < 1)) throw Error("train_ratio must lie in (0,1)");
  if (embedder.dimension != model.embed_dim) {
    throw Error("dimension mismatch: embedder.dimension " + std::to_string(embedder.dimension) +
                " vs model.embed_dim " + std::to_string(model.embed_dim));
  }
  model.validate();
  train.validate();
}

PipelineConfig config_from_json(const json& doc) {
  PipelineConfig cfg;
  reject_unknown(doc,
                 {"alpha", "threshold", "top_k", "betweenness_interval", "betweenness_samples", "window_horizon",
                  "train_ratio", "embedder", "model", "train", "red_flags", "external_generator", "synthetic"},
                 "");
  read(doc, "alpha", cfg.alpha);
  read(doc, "threshold", cfg.threshold);
  read(doc, "top_k", cfg.top_k);
  read(doc, "betweenness_interval", cfg.betweenness_interval);
  if (doc.contains("betweenness_samples") && !doc["betweenness_samples"].is_null()) {
    cfg.betweenness_samples = doc["betweenness_samples"].get<std::size_t>();
  }
  read(doc, "window_horizon", cfg.window_horizon);
  read(doc, "train_ratio", cfg.train_ratio);

  if (auto it = doc.find("embedder"); it != doc.end()) {
    reject_unknown(*it, {"kind", "dimension", "table"}, "embedder");
    read(*it, "kind", cfg.embedder.kind);
    read(*it, "dimension", cfg.embedder.dimension);
    read(*it, "table", cfg.embedder.table);
  }
  cfg.model.embed_dim = cfg.embedder.dimension;
  if (auto it = doc.find("model"); it != doc.end()) {
    reject_unknown(*it, {"struct_width", "fused_width", "hidden_width", "layers"}, "model");
    read(*it, "struct_width", cfg.model.struct_width);
    read(*it, "fused_width", cfg.model.fused_width);
    read(*it, "hidden_width", cfg.model.hidden_width);
    read(*it, "layers", cfg.model.layers);
  }
  if (auto it = doc.find("train"); it != doc.end()) {
    reject_unknown(*it, {"learning_rate", "epochs", "pos_weight", "seed", "optimizer", "momentum"}, "train");
    read(*it, "learning_rate", cfg.train.learning_rate);
    read(*it, "epochs", cfg.train.epochs);
    read(*it, "pos_weight", cfg.train.pos_weight);
    read(*it, "seed", cfg.train.seed);
    read(*it, "momentum", cfg.train.momentum);
    if (it->contains("optimizer")) cfg.train.optimizer = optimizer_from_string((*it)["optimizer"].get<std::string>());
  }
  if (auto it = doc.find("red_flags"); it != doc.end()) {
    reject_unknown(*it,
                   {"fan_in_degree", "fan_out_degree", "betweenness", "frequency", "structuring_floor",
                    "structuring_ceiling"},
                   "red_flags");
    read(*it, "fan_in_degree", cfg.red_flags.fan_in_degree);
    read(*it, "fan_out_degree", cfg.red_flags.fan_out_degree);
    read(*it, "betweenness", cfg.red_flags.betweenness);
    read(*it, "frequency", cfg.red_flags.frequency);
    read(*it, "structuring_floor", cfg.red_flags.structuring_floor);
    read(*it, "structuring_ceiling", cfg.red_flags.structuring_ceiling);
  }
  if (auto it = doc.find("external_generator"); it != doc.end()) {
    reject_unknown(*it, {"endpoint", "timeout_ms"}, "external_generator");
    read(*it, "endpoint", cfg.external.endpoint);
    std::int64_t ms = cfg.external.timeout.count();
    read(*it, "timeout_ms", ms);
    cfg.external.timeout = std::chrono::milliseconds(ms);
  }
  if (auto it = doc.find("synthetic"); it != doc.end()) {
    reject_unknown(*it,
                   {"n_transactions", "illicit_fraction", "seed", "pattern_mix", "start_time", "mean_gap_seconds",
                    "licit_phrases", "illicit_phrases"},
                   "synthetic");
    auto& s = cfg.synthetic;
    read(*it, "n_transactions", s.n_transactions);
    read(*it, "illicit_fraction", s.illicit_fraction);
    read(*it, "seed", s.seed);
    read(*it, "start_time", s.start_time);
    read(*it, "mean_gap_seconds", s.mean_gap_seconds);
    read(*it, "licit_phrases", s.licit_phrases);
    read(*it, "illicit_phrases", s.illicit_phrases);
    if (auto mix = it->find("pattern_mix"); mix != it->end()) {
      reject_unknown(*mix, {"fan_in", "cycle", "pass_through"}, "synthetic.pattern_mix");
      read(*mix, "fan_in", s.mix.fan_in);
      read(*mix, "cycle", s.mix.cycle);
      read(*mix, "pass_through", s.mix.pass_through);
    }
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path.string());
  auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error("config is not valid JSON: " + path.string());
  return config_from_json(doc);
}

json to_json(const PipelineConfig& cfg) {
  json samples = cfg.betweenness_samples ? json(*cfg.betweenness_samples) : json(nullptr);
  return {{"alpha", cfg.alpha},
          {"threshold", cfg.threshold},
          {"top_k", cfg.top_k},
          {"betweenness_interval", cfg.betweenness_interval},
          {"betweenness_samples", samples},
          {"window_horizon", cfg.window_horizon},
          {"train_ratio", cfg.train_ratio},
          {"embedder", {{"kind", cfg.embedder.kind}, {"dimension", cfg.embedder.dimension}, {"table", cfg.embedder.table}}},
          {"model",
           {{"struct_width", cfg.model.struct_width},
            {"fused_width", cfg.model.fused_width},
            {"hidden_width", cfg.model.hidden_width},
            {"layers", cfg.model.layers}}},
          {"train",
           {{"learning_rate", cfg.train.learning_rate},
            {"epochs", cfg.train.epochs},
            {"pos_weight", cfg.train.pos_weight},
            {"seed", cfg.train.seed},
            {"optimizer", std::string(to_string(cfg.train.optimizer))},
            {"momentum", cfg.train.momentum}}},
          {"red_flags",
           {{"fan_in_degree", cfg.red_flags.fan_in_degree},
            {"fan_out_degree", cfg.red_flags.fan_out_degree},
            {"betweenness", cfg.red_flags.betweenness},
            {"frequency", cfg.red_flags.frequency},
            {"structuring_floor", cfg.red_flags.structuring_floor},
            {"structuring_ceiling", cfg.red_flags.structuring_ceiling}}},
          {"external_generator", {{"endpoint", cfg.external.endpoint}, {"timeout_ms", cfg.external.timeout.count()}}},
          {"synthetic",
           {{"n_transactions", cfg.synthetic.n_transactions},
            {"illicit_fraction", cfg.synthetic.illicit_fraction},
            {"seed", cfg.synthetic.seed},
            {"pattern_mix",
             {{"fan_in", cfg.synthetic.mix.fan_in},
              {"cycle", cfg.synthetic.mix.cycle},
              {"pass_through", cfg.synthetic.mix.pass_through}}},
            {"start_time", cfg.synthetic.start_time},
            {"mean_gap_seconds", cfg.synthetic.mean_gap_seconds}}}};
}

}  // namespace aml
