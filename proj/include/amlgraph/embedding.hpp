#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "amlgraph/error.hpp"

namespace aml {

inline constexpr std::size_t kDefaultEmbeddingDim = 64;

struct EmbeddingVector {
  std::vector<double> values;
  bool normalized = false;

  bool is_zero() const;
  double norm() const;
};

/// Text encoder shared by narratives and regulatory clauses.
///
/// Hashing kind: the text is lowercased (ASCII) and split on ASCII
/// non-alphanumerics; bytes >= 0x80 count as word characters so UTF-8 words
/// stay whole. Every word contributes the token "w:<word>" and each of its
/// contiguous 3-byte substrings contributes "c:<tri>". A token with 64-bit
/// FNV-1a hash h adds +1 (bit 0 of h set) or -1 (clear) at index (h >> 1) mod D.
///
/// External-table kind: exact lookup of the full text. Empty text maps to the
/// zero vector unless the table holds an explicit "" entry.
class Embedder {
 public:
  enum class Kind { Hashing, ExternalTable };

  static Embedder hashing(std::size_t dimension = kDefaultEmbeddingDim);
  static Embedder external_table(std::size_t dimension, std::unordered_map<std::string, std::vector<double>> table);

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t table_size() const noexcept { return table_.size(); }

  /// Unnormalized embedding. Throws Error("embedding not found") for unknown keys.
  EmbeddingVector embed(std::string_view text) const;

 private:
  Embedder(Kind kind, std::size_t dimension) : kind_(kind), dimension_(dimension) {}

  Kind kind_;
  std::size_t dimension_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

inline EmbeddingVector embed_text(const Embedder& emb, std::string_view text) { return emb.embed(text); }

/// Unit-L2 copy of `v`. Throws Error on the zero vector.
EmbeddingVector normalize(const EmbeddingVector& v);

/// normalize(), except the zero vector passes through unchanged (normalized = false).
EmbeddingVector normalize_or_zero(const EmbeddingVector& v);

/// JSONL of {"text": string, "vector": [D reals]}.
Embedder load_external_table(const std::filesystem::path& file, std::size_t dimension);

std::uint64_t fnv1a64(std::string_view bytes);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace aml
