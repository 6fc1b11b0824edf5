#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "amlgraph/transaction.hpp"

namespace aml {

/// Confusion-matrix metrics. A zero denominator yields 0 with the matching
/// `*_undefined` flag set.
struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0, accuracy = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;

  std::size_t total() const { return tp + fp + tn + fn; }
  nlohmann::json to_json() const;
};

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

/// Flags score > theta. Every labelled id must have a prediction; throws on an
/// empty labelled set or a missing prediction.
Metrics evaluate(const std::unordered_map<std::string, double>& predictions,
                 const std::unordered_map<std::string, int>& labels, double theta);

struct ChronologicalSplit {
  std::vector<Transaction> train;
  std::vector<Transaction> test;
  Timestamp boundary = 0;  // timestamp of the first test transaction (last train one if test is empty)
};

/// First ceil(ratio * n) transactions train, the rest test. Throws on
/// unordered input or ratio outside (0,1).
ChronologicalSplit chronological_split(const std::vector<Transaction>& txs, double ratio);

/// tx_id -> 1/0 for licit/illicit transactions; unknown labels are omitted.
std::unordered_map<std::string, int> transaction_labels(const std::vector<Transaction>& txs);

}  // namespace aml
