#include "amlgraph/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace aml {

std::string embedder_signature(const Embedder& emb) {
  if (emb.kind() == Embedder::Kind::Hashing) return "hashing:" + std::to_string(emb.dimension());
  return "external-table:" + std::to_string(emb.dimension());
}

ClauseIndex::ClauseIndex(std::size_t dimension, std::string signature, std::vector<RegulatoryClause> entries)
    : dimension_(dimension), signature_(std::move(signature)), entries_(std::move(entries)) {
  if (entries_.empty()) throw Error("empty clause corpus");
  std::unordered_set<std::string> ids;
  for (const auto& c : entries_) {
    if (!ids.insert(c.clause_id).second) throw Error("duplicate clause_id: " + c.clause_id);
    if (c.embedding.size() != dimension_) throw Error("dimension mismatch in clause " + c.clause_id);
  }
}

const RegulatoryClause& ClauseIndex::at(std::string_view clause_id) const {
  for (const auto& c : entries_) {
    if (c.clause_id == clause_id) return c;
  }
  throw Error("unknown clause_id: " + std::string(clause_id));
}

std::vector<ClauseRecord> load_corpus(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open clause corpus: " + file.string());
  std::vector<ClauseRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw Error("malformed clause at " + file.string() + ":" + std::to_string(line_no));
    }
    ClauseRecord rec;
    for (auto [field, dst] : {std::pair{"clause_id", &rec.clause_id}, std::pair{"source", &rec.source},
                              std::pair{"text", &rec.text}}) {
      if (!obj.contains(field) || !obj[field].is_string()) {
        throw Error(std::string("clause missing string field '") + field + "' at " + file.string() + ":" +
                    std::to_string(line_no));
      }
      *dst = obj[field].get<std::string>();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

ClauseIndex build_index(const std::vector<ClauseRecord>& corpus, const Embedder& emb) {
  if (corpus.empty()) throw Error("empty clause corpus");
  std::vector<RegulatoryClause> entries;
  entries.reserve(corpus.size());
  for (const auto& rec : corpus) {
    auto e = emb.embed(rec.text);
    if (e.is_zero()) throw Error("clause " + rec.clause_id + " has a zero embedding");
    entries.push_back({rec.clause_id, rec.source, rec.text, normalize(e).values});
  }
  return ClauseIndex(emb.dimension(), embedder_signature(emb), std::move(entries));
}

RetrievalResult query_top_k(const ClauseIndex& index, std::span<const double> query, std::size_t k) {
  if (k == 0) throw Error("k must be >= 1");
  if (query.size() != index.dimension()) {
    throw Error("dimension mismatch: query width " + std::to_string(query.size()) + " vs index " +
                std::to_string(index.dimension()));
  }
  const auto& entries = index.entries();
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) scored.emplace_back(dot(query, entries[i].embedding), i);

  auto better = [&](const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return entries[a.second].clause_id < entries[b.second].clause_id;
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

  RetrievalResult out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({entries[scored[i].second].clause_id, scored[i].first});
  return out;
}

EmbeddingVector query_embedding(const Transaction& tx, const NodeFeatures& features, const Embedder& emb,
                                const RedFlagRules& rules) {
  std::string text = tx.narrative;
  for (const auto& flag : red_flags(tx, features, rules)) {
    if (!text.empty()) text += ' ';
    text += flag.query_terms;
  }
  if (text.empty()) throw Error("empty query");
  auto e = emb.embed(text);
  if (e.is_zero()) throw Error("empty query");
  return normalize(e);
}

void save_index(const ClauseIndex& index, const std::filesystem::path& file) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& c : index.entries()) {
    clauses.push_back({{"clause_id", c.clause_id}, {"source", c.source}, {"text", c.text}, {"embedding", c.embedding}});
  }
  nlohmann::json doc{{"dimension", index.dimension()}, {"embedder", index.signature()}, {"clauses", clauses}};
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot write index: " + file.string());
  out << doc.dump() << '\n';
  if (!out) throw Error("write failed: " + file.string());
}

ClauseIndex load_index(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open index: " + file.string());
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("dimension") || !doc.contains("embedder") ||
      !doc.contains("clauses")) {
    throw Error("malformed index file: " + file.string());
  }
  const auto dim = doc["dimension"].get<std::size_t>();
  std::vector<RegulatoryClause> entries;
  for (const auto& c : doc["clauses"]) {
    entries.push_back({c.at("clause_id").get<std::string>(), c.at("source").get<std::string>(),
                       c.at("text").get<std::string>(), c.at("embedding").get<std::vector<double>>()});
    double n = std::sqrt(dot(entries.back().embedding, entries.back().embedding));
    if (std::abs(n - 1.0) > 1e-6) throw Error("index clause " + entries.back().clause_id + " is not unit-norm");
  }
  return ClauseIndex(dim, doc["embedder"].get<std::string>(), std::move(entries));
}

}  // namespace aml
