#include "amlgraph/transaction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_set>

#include <json.hpp>

namespace aml {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw ParseError(ParseError::Kind::MissingField, field,
                     std::string("missing required field '") + field + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* field, bool allow_empty) {
  const json& v = require(obj, field);
  if (!v.is_string()) {
    throw ParseError(ParseError::Kind::InvalidField, field,
                     std::string("field '") + field + "' must be a string");
  }
  auto s = v.get<std::string>();
  if (!allow_empty && s.empty()) {
    throw ParseError(ParseError::Kind::InvalidField, field,
                     std::string("field '") + field + "' must not be empty");
  }
  return s;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Licit: return "licit";
    case Label::Illicit: return "illicit";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

Label label_from_string(std::string_view text) {
  if (text == "licit") return Label::Licit;
  if (text == "illicit") return Label::Illicit;
  if (text == "unknown") return Label::Unknown;
  throw ParseError(ParseError::Kind::InvalidField, "label",
                   "field 'label' must be one of licit|illicit|unknown, got '" + std::string(text) + "'");
}

Transaction parse_transaction(std::string_view line) {
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw ParseError(ParseError::Kind::MalformedJson, "", "malformed JSON: expected one object per line");
  }

  Transaction tx;
  tx.tx_id = require_string(obj, "tx_id", false);
  tx.sender = require_string(obj, "sender", false);
  tx.receiver = require_string(obj, "receiver", false);

  const json& amount = require(obj, "amount");
  if (!amount.is_number()) {
    throw ParseError(ParseError::Kind::InvalidField, "amount", "field 'amount' must be numeric");
  }
  tx.amount = amount.get<double>();
  if (!std::isfinite(tx.amount)) {
    throw ParseError(ParseError::Kind::InvalidField, "amount", "field 'amount' must be finite");
  }
  if (tx.amount < 0.0) {
    throw ParseError(ParseError::Kind::NegativeAmount, "amount", "negative amount");
  }

  const json& ts = require(obj, "timestamp");
  if (ts.is_number_integer()) {
    tx.timestamp = ts.get<Timestamp>();
  } else if (ts.is_number_float() && std::floor(ts.get<double>()) == ts.get<double>()) {
    tx.timestamp = static_cast<Timestamp>(ts.get<double>());
  } else {
    throw ParseError(ParseError::Kind::NonNumericTimestamp, "timestamp",
                     "field 'timestamp' must be an integer number of seconds");
  }
  if (tx.timestamp < 0) {
    throw ParseError(ParseError::Kind::InvalidField, "timestamp", "field 'timestamp' must be >= 0");
  }

  tx.narrative = require_string(obj, "narrative", true);

  if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw ParseError(ParseError::Kind::InvalidField, "label", "field 'label' must be a string");
    }
    tx.label = label_from_string(it->get<std::string>());
  }
  return tx;
}

std::string serialize_transaction(const Transaction& tx) {
  json obj;
  obj["tx_id"] = tx.tx_id;
  obj["sender"] = tx.sender;
  obj["receiver"] = tx.receiver;
  obj["amount"] = tx.amount;
  obj["timestamp"] = tx.timestamp;
  obj["narrative"] = tx.narrative;
  obj["label"] = std::string(to_string(tx.label));
  return obj.dump();
}

std::vector<Transaction> read_transactions(std::istream& in) {
  std::vector<Transaction> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_transaction(line));
    } catch (const ParseError& e) {
      throw ParseError(e.kind(), e.field(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(out.back().tx_id).second) {
      throw ParseError(ParseError::Kind::InvalidField, "tx_id",
                       "line " + std::to_string(line_no) + ": duplicate tx_id '" + out.back().tx_id + "'");
    }
  }
  return out;
}

std::vector<Transaction> read_transactions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open transaction file: " + path);
  return read_transactions(in);
}

void write_transactions_file(const std::string& path, const std::vector<Transaction>& txs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write transaction file: " + path);
  for (const auto& tx : txs) out << serialize_transaction(tx) << '\n';
  if (!out) throw Error("write failed: " + path);
}

void sort_stream(std::vector<Transaction>& txs) {
  std::stable_sort(txs.begin(), txs.end(), [](const Transaction& a, const Transaction& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.tx_id < b.tx_id;
  });
}

bool is_time_ordered(const std::vector<Transaction>& txs) {
  return std::is_sorted(txs.begin(), txs.end(),
                        [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
}

}  // namespace aml
