#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amlgraph/transaction.hpp"

namespace aml {

/// Relative weights of the planted illicit structures.
struct PatternMix {
  double fan_in = 0.4;        // several ring accounts pay one ring hub in quick succession
  double cycle = 0.3;         // funds return to their origin through 3-5 ring accounts
  double pass_through = 0.3;  // a chain of 3-4 hops, each leg minutes after the last
};

struct SyntheticConfig {
  std::size_t n_transactions = 5000;
  double illicit_fraction = 0.2;
  std::uint64_t seed = 7;
  PatternMix mix;
  Timestamp start_time = 1'700'000'000;
  double mean_gap_seconds = 60.0;
  std::vector<std::string> licit_phrases = default_licit_phrases();
  std::vector<std::string> illicit_phrases = default_illicit_phrases();

  static std::vector<std::string> default_licit_phrases();
  static std::vector<std::string> default_illicit_phrases();

  /// Throws Error when the fraction is outside (0,1), weights do not sum to 1,
  /// or the phrase pools overlap.
  void validate() const;
};

/// Seeded generator with planted illicit patterns.
///
/// The illicit count is drawn once as Binomial(n, illicit_fraction); pattern
/// instances are then planted among a ring of accounts until exactly that many
/// illicit transactions exist (the last instance may be truncated). Licit
/// traffic flows between a disjoint population of ordinary accounts. The
/// output is sorted by (timestamp, tx_id) and is a pure function of `cfg`.
std::vector<Transaction> generate_synthetic(const SyntheticConfig& cfg);

}  // namespace aml
