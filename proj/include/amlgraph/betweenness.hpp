#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "amlgraph/graph.hpp"

namespace aml {

/// Simple directed graph in CSR form; vertices are 0..n-1.
struct Digraph {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;  // size n+1
  std::vector<std::size_t> targets;

  /// Builds from an edge list, dropping self-loops and duplicate edges.
  static Digraph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
};

/// Brandes' algorithm over unweighted shortest paths. Scores are raw
/// dependent-pair counts (no normalization). With `sources`, only those
/// sources are accumulated; they are processed in ascending order.
std::vector<double> brandes(const Digraph& g, const std::vector<std::size_t>* sources = nullptr);

/// Betweenness of every live node in the window. Multi-edges collapse to one
/// directed edge. With `sample_sources`, that many distinct sources are drawn
/// (seeded) and the sum is scaled by |V| / samples; asking for |V| or more
/// samples reproduces the exact value.
BetweennessMap betweenness_all(const TransactionGraph& graph, std::optional<std::size_t> sample_sources = std::nullopt,
                               std::uint64_t seed = 0);

}  // namespace aml
