#include "amlgraph/red_flags.hpp"

#include <cstdio>

namespace aml {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

std::vector<RedFlag> red_flags(const Transaction& tx, const NodeFeatures& sender, const RedFlagRules& rules) {
  std::vector<RedFlag> flags;
  if (sender.in_degree > rules.fan_in_degree) {
    flags.push_back({"high_fan_in", "high fan-in aggregation of funds from many senders",
                     fmt("high fan-in: sender received %.0f transfers inside the window", sender.in_degree)});
  }
  if (sender.out_degree > rules.fan_out_degree) {
    flags.push_back({"high_fan_out", "high fan-out dispersal of funds to many recipients",
                     fmt("high fan-out: sender made %.0f transfers inside the window", sender.out_degree)});
  }
  if (sender.betweenness > rules.betweenness) {
    flags.push_back({"intermediary", "intermediary pass-through layering account",
                     fmt("intermediary position: betweenness %.2f", sender.betweenness)});
  }
  if (sender.frequency > rules.frequency) {
    flags.push_back({"high_velocity", "rapid high velocity movement of funds",
                     fmt("high velocity: decay-weighted activity %.2f", sender.frequency)});
  }
  if (tx.amount >= rules.structuring_floor && tx.amount < rules.structuring_ceiling) {
    flags.push_back({"structuring", "structuring amount just below reporting threshold",
                     fmt("amount %.2f sits just below the reporting threshold", tx.amount)});
  }
  return flags;
}

}  // namespace aml
