#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amlgraph/error.hpp"

namespace aml {

using Timestamp = std::int64_t;

enum class Label { Licit, Illicit, Unknown };

std::string_view to_string(Label label);
Label label_from_string(std::string_view text);

/// One streamed financial event.
struct Transaction {
  std::string tx_id;
  std::string sender;
  std::string receiver;
  double amount = 0.0;
  Timestamp timestamp = 0;
  std::string narrative;
  Label label = Label::Unknown;

  bool operator==(const Transaction&) const = default;
};

/// Parses one JSONL line. Throws ParseError naming the offending field.
Transaction parse_transaction(std::string_view line);

/// Compact single-line JSON, the inverse of parse_transaction.
std::string serialize_transaction(const Transaction& tx);

/// Reads a whole JSONL stream; blank lines are skipped. Errors carry the
/// 1-based line number. Duplicate tx_ids are rejected.
std::vector<Transaction> read_transactions(std::istream& in);
std::vector<Transaction> read_transactions_file(const std::string& path);
void write_transactions_file(const std::string& path, const std::vector<Transaction>& txs);

/// Stable sort by (timestamp, tx_id).
void sort_stream(std::vector<Transaction>& txs);

/// True when timestamps never decrease.
bool is_time_ordered(const std::vector<Transaction>& txs);

}  // namespace aml
