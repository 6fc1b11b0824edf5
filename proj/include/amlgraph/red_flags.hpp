#pragma once

#include <string>
#include <vector>

#include "amlgraph/graph.hpp"
#include "amlgraph/transaction.hpp"

namespace aml {

/// Fixed thresholds that turn structural features into named red flags.
/// A flag fires when its feature strictly exceeds the threshold.
struct RedFlagRules {
  double fan_in_degree = 4;
  double fan_out_degree = 4;
  double betweenness = 25;
  double frequency = 8;
  double structuring_floor = 8000;    // amounts in [floor, ceiling) look like threshold avoidance
  double structuring_ceiling = 10000;
};

struct RedFlag {
  std::string code;         // stable identifier, e.g. "high_fan_in"
  std::string query_terms;  // appended to the retrieval query
  std::string description;  // human-readable, quotes the triggering value
};

std::vector<RedFlag> red_flags(const Transaction& tx, const NodeFeatures& sender, const RedFlagRules& rules);

}  // namespace aml
