#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "amlgraph/embedding.hpp"
#include "amlgraph/red_flags.hpp"

namespace aml {

struct ClauseRecord {
  std::string clause_id;
  std::string source;
  std::string text;
};

struct RegulatoryClause {
  std::string clause_id;
  std::string source;
  std::string text;
  std::vector<double> embedding;  // unit L2
};

struct RetrievedClause {
  std::string clause_id;
  double similarity = 0.0;

  bool operator==(const RetrievedClause&) const = default;
};

using RetrievalResult = std::vector<RetrievedClause>;

/// Identifies the vector space an index lives in, e.g. "hashing:64".
std::string embedder_signature(const Embedder& emb);

/// Exact cosine index over an embedded clause corpus (flat scan).
class ClauseIndex {
 public:
  ClauseIndex(std::size_t dimension, std::string signature, std::vector<RegulatoryClause> entries);

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& signature() const noexcept { return signature_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<RegulatoryClause>& entries() const noexcept { return entries_; }
  /// Throws Error for unknown ids.
  const RegulatoryClause& at(std::string_view clause_id) const;

 private:
  std::size_t dimension_;
  std::string signature_;
  std::vector<RegulatoryClause> entries_;
};

std::vector<ClauseRecord> load_corpus(const std::filesystem::path& file);

/// Embeds and normalizes every clause with the shared embedder.
ClauseIndex build_index(const std::vector<ClauseRecord>& corpus, const Embedder& emb);

/// Exact top-k by cosine similarity; ties break by clause_id ascending.
RetrievalResult query_top_k(const ClauseIndex& index, std::span<const double> query, std::size_t k);

/// The retrieval query: narrative followed by the query terms of every red
/// flag, embedded and normalized. Throws Error("empty query") when nothing
/// embeds to a non-zero vector.
EmbeddingVector query_embedding(const Transaction& tx, const NodeFeatures& features, const Embedder& emb,
                                const RedFlagRules& rules = {});

/// JSON index file: {"dimension","embedder","clauses":[{clause_id,source,text,embedding}]}.
void save_index(const ClauseIndex& index, const std::filesystem::path& file);
ClauseIndex load_index(const std::filesystem::path& file);

}  // namespace aml
