#include "amlgraph/embedding.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace aml {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

void add_token(std::vector<double>& out, std::string_view token) {
  const std::uint64_t h = fnv1a64(token);
  out[(h >> 1) % out.size()] += (h & 1U) ? 1.0 : -1.0;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dimension mismatch in dot product");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool EmbeddingVector::is_zero() const {
  for (double v : values) {
    if (v != 0.0) return false;
  }
  return true;
}

double EmbeddingVector::norm() const { return std::sqrt(dot(values, values)); }

Embedder Embedder::hashing(std::size_t dimension) {
  if (dimension == 0) throw Error("embedding dimension must be positive");
  return Embedder(Kind::Hashing, dimension);
}

Embedder Embedder::external_table(std::size_t dimension, std::unordered_map<std::string, std::vector<double>> table) {
  if (dimension == 0) throw Error("embedding dimension must be positive");
  for (const auto& [text, vec] : table) {
    if (vec.size() != dimension) {
      throw Error("inconsistent vector length for '" + text + "': expected " + std::to_string(dimension) + ", got " +
                  std::to_string(vec.size()));
    }
  }
  Embedder e(Kind::ExternalTable, dimension);
  e.table_ = std::move(table);
  return e;
}

EmbeddingVector Embedder::embed(std::string_view text) const {
  EmbeddingVector out{std::vector<double>(dimension_, 0.0), false};
  if (kind_ == Kind::ExternalTable) {
    auto it = table_.find(std::string(text));
    if (it != table_.end()) {
      out.values = it->second;
      return out;
    }
    if (text.empty()) return out;
    throw Error("embedding not found for text: '" + std::string(text) + "'");
  }

  std::string word;
  std::string token;
  auto flush = [&] {
    if (word.empty()) return;
    token = "w:" + word;
    add_token(out.values, token);
    for (std::size_t i = 0; i + 3 <= word.size(); ++i) {
      token = "c:" + word.substr(i, 3);
      add_token(out.values, token);
    }
    word.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      word.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("cannot normalize zero narrative embedding");
  EmbeddingVector out{v.values, true};
  for (double& x : out.values) x /= n;
  return out;
}

EmbeddingVector normalize_or_zero(const EmbeddingVector& v) {
  if (v.is_zero()) return EmbeddingVector{v.values, false};
  return normalize(v);
}

Embedder load_external_table(const std::filesystem::path& file, std::size_t dimension) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open embedding table: " + file.string());
  std::unordered_map<std::string, std::vector<double>> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto obj = nlohmann::json::parse(line, nullptr, false);
    const std::string where = file.string() + ":" + std::to_string(line_no);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("text") || !obj.contains("vector") ||
        !obj["text"].is_string() || !obj["vector"].is_array()) {
      throw Error("malformed embedding row at " + where);
    }
    std::vector<double> vec;
    for (const auto& x : obj["vector"]) {
      if (!x.is_number()) throw Error("non-numeric vector entry at " + where);
      vec.push_back(x.get<double>());
    }
    if (vec.size() != dimension) {
      throw Error("inconsistent vector length at " + where + ": expected " + std::to_string(dimension) + ", got " +
                  std::to_string(vec.size()));
    }
    auto text = obj["text"].get<std::string>();
    if (!table.emplace(text, std::move(vec)).second) throw Error("duplicate text key at " + where);
  }
  return Embedder::external_table(dimension, std::move(table));
}

}  // namespace aml
