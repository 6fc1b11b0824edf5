#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "amlgraph/transaction.hpp"

namespace aml {

inline constexpr std::size_t kEllipticFeatureWidth = 166;

/// Elliptic Bitcoin export, replayed as a transaction stream.
///
/// Each edgelist row becomes one Transaction with amount 1.0, timestamp equal
/// to the source node's time step, an empty narrative, and the source node's
/// class as label. Feature rows are stored as float to keep the full dataset
/// (~200k x 166) under 150 MB.
struct EllipticDataset {
  std::vector<Transaction> transactions;
  std::unordered_map<std::string, std::size_t> node_row;  // node id -> row in `features`
  std::vector<float> features;                            // row-major, kEllipticFeatureWidth per row
  std::unordered_map<std::string, Label> labels;

  std::size_t node_count() const { return node_row.size(); }
  std::size_t edge_count() const { return transactions.size(); }
  std::size_t labeled_count() const;
  std::size_t illicit_count() const;
  std::size_t time_step_count() const;
  std::vector<float> node_features(const std::string& node) const;
};

/// Loads elliptic_txs_{features,classes,edgelist}.csv from `dir`.
/// Class codes: "1" illicit, "2" licit, "unknown".
EllipticDataset load_elliptic(const std::filesystem::path& dir);

}  // namespace aml
