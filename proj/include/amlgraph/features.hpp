#pragma once

#include <string>
#include <string_view>
#include <unordered_map>

#include "amlgraph/embedding.hpp"
#include "amlgraph/graph.hpp"
#include "amlgraph/model.hpp"

namespace aml {

/// Decay-weighted mean of the normalized narrative embeddings on the node's
/// incoming edges, renormalized. Zero (normalized = false) when there are no
/// incoming edges or every incoming narrative embeds to zero. Edges carrying a
/// cached embedding use it; others are embedded with `emb`.
EmbeddingVector node_narrative(const TransactionGraph& graph, NodeIndex node, const Embedder& emb,
                               const DecayParams& decay);
EmbeddingVector node_narrative(const TransactionGraph& graph, std::string_view node, const Embedder& emb,
                               const DecayParams& decay);

/// (node id, label) training example; see sender_examples().
using NodeExample = std::pair<std::string, int>;

/// Every live node, rows in graph.nodes() order. Examples whose node is not
/// in the graph (pruned) are dropped.
GraphBatch full_batch(const TransactionGraph& graph, const BetweennessMap& bet, const Embedder& emb,
                      const std::vector<NodeExample>* examples = nullptr);

/// The `hops`-neighbourhood of `center` (row 0). Rows within hops-1 carry
/// complete neighbour lists; boundary rows keep their true degree, so the
/// center's output after `hops` layers equals the full-graph value.
GraphBatch ego_batch(const TransactionGraph& graph, NodeIndex center, std::size_t hops, const BetweennessMap& bet,
                     const Embedder& emb);

}  // namespace aml
