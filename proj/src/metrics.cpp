#include "amlgraph/metrics.hpp"

#include <cmath>

namespace aml {

nlohmann::json Metrics::to_json() const {
  return {{"tp", tp},
          {"fp", fp},
          {"tn", tn},
          {"fn", fn},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"accuracy", accuracy},
          {"precision_undefined", precision_undefined},
          {"recall_undefined", recall_undefined}};
}

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  if (tp + fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
  if (m.total() > 0) m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.total());
  return m;
}

Metrics evaluate(const std::unordered_map<std::string, double>& predictions,
                 const std::unordered_map<std::string, int>& labels, double theta) {
  if (labels.empty()) throw Error("no labelled transactions to evaluate");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& [id, label] : labels) {
    auto it = predictions.find(id);
    if (it == predictions.end()) throw Error("missing prediction for labelled transaction " + id);
    const bool flagged = it->second > theta;
    if (label == 1) {
      (flagged ? tp : fn)++;
    } else {
      (flagged ? fp : tn)++;
    }
  }
  return metrics_from_counts(tp, fp, tn, fn);
}

ChronologicalSplit chronological_split(const std::vector<Transaction>& txs, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must lie in (0,1)");
  if (!is_time_ordered(txs)) throw Error("chronological split requires time-ordered input");
  const auto cut = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(txs.size()) - 1e-9));
  ChronologicalSplit split;
  split.train.assign(txs.begin(), txs.begin() + static_cast<std::ptrdiff_t>(cut));
  split.test.assign(txs.begin() + static_cast<std::ptrdiff_t>(cut), txs.end());
  if (!split.test.empty()) {
    split.boundary = split.test.front().timestamp;
  } else if (!split.train.empty()) {
    split.boundary = split.train.back().timestamp;
  }
  return split;
}

std::unordered_map<std::string, int> transaction_labels(const std::vector<Transaction>& txs) {
  std::unordered_map<std::string, int> out;
  for (const auto& tx : txs) {
    if (tx.label == Label::Illicit) out.emplace(tx.tx_id, 1);
    if (tx.label == Label::Licit) out.emplace(tx.tx_id, 0);
  }
  return out;
}

}  // namespace aml
