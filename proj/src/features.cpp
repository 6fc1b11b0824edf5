#include "amlgraph/features.hpp"

#include <unordered_map>

namespace aml {

namespace {

void write_row(const TransactionGraph& graph, NodeIndex n, const BetweennessMap& bet, const Embedder& emb,
               GraphBatch& batch, std::size_t row) {
  auto x = structural_input(node_structural_features(graph, n, bet));
  std::copy(x.begin(), x.end(), batch.structural.row(row).begin());
  auto e = node_narrative(graph, n, emb, graph.decay());
  std::copy(e.values.begin(), e.values.end(), batch.narrative.row(row).begin());
}

}  // namespace

EmbeddingVector node_narrative(const TransactionGraph& graph, NodeIndex node, const Embedder& emb,
                               const DecayParams& decay) {
  const std::size_t dim = emb.dimension();
  EmbeddingVector acc{std::vector<double>(dim, 0.0), false};
  double weight = 0.0;
  for (EdgeIndex e : graph.in_edges(node)) {
    const Edge& edge = graph.edge(e);
    EmbeddingVector own;
    const std::vector<double>* vec;
    if (edge.embedding) {
      vec = edge.embedding.get();
    } else {
      own = normalize_or_zero(emb.embed(edge.narrative));
      vec = &own.values;
    }
    if (vec->size() != dim) throw Error("dimension mismatch: cached narrative embedding");
    bool zero = true;
    for (double v : *vec) zero = zero && v == 0.0;
    if (zero) continue;
    const double delta = decay_weight(decay, graph.now(), edge.timestamp);
    for (std::size_t i = 0; i < dim; ++i) acc.values[i] += delta * (*vec)[i];
    weight += delta;
  }
  if (weight > 0.0) {
    for (double& v : acc.values) v /= weight;
  }
  return normalize_or_zero(acc);
}

EmbeddingVector node_narrative(const TransactionGraph& graph, std::string_view node, const Embedder& emb,
                               const DecayParams& decay) {
  return node_narrative(graph, graph.require(node), emb, decay);
}

GraphBatch full_batch(const TransactionGraph& graph, const BetweennessMap& bet, const Embedder& emb,
                      const std::vector<NodeExample>* examples) {
  const auto live = graph.nodes();
  const std::size_t n = live.size();
  std::unordered_map<NodeIndex, std::size_t> local;
  local.reserve(n);
  for (std::size_t i = 0; i < n; ++i) local.emplace(live[i], i);

  GraphBatch batch;
  batch.structural = Matrix(n, kStructuralInputs);
  batch.narrative = Matrix(n, emb.dimension());
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.node_ids.push_back(graph.node_id(live[i]));
    write_row(graph, live[i], bet, emb, batch, i);
    for (NodeIndex j : graph.neighbors(live[i])) neighbors[i].push_back(local.at(j));
  }
  batch.adjacency = NormalizedAdjacency::from_neighbors(neighbors);
  if (examples != nullptr) {
    for (const auto& [node, label] : *examples) {
      if (auto id = graph.find(node)) batch.examples.push_back({local.at(*id), label});
    }
  }
  return batch;
}

GraphBatch ego_batch(const TransactionGraph& graph, NodeIndex center, std::size_t hops, const BetweennessMap& bet,
                     const Embedder& emb) {
  std::vector<NodeIndex> order{center};
  std::vector<std::size_t> depth{0};
  std::vector<std::vector<NodeIndex>> adjacent;
  std::unordered_map<NodeIndex, std::size_t> local{{center, 0}};
  for (std::size_t head = 0; head < order.size(); ++head) {
    adjacent.push_back(graph.neighbors(order[head]));
    if (depth[head] == hops) continue;
    for (NodeIndex j : adjacent.back()) {
      if (local.emplace(j, order.size()).second) {
        order.push_back(j);
        depth.push_back(depth[head] + 1);
      }
    }
  }

  const std::size_t n = order.size();
  GraphBatch batch;
  batch.structural = Matrix(n, kStructuralInputs);
  batch.narrative = Matrix(n, emb.dimension());
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<std::size_t> degrees(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.node_ids.push_back(graph.node_id(order[i]));
    write_row(graph, order[i], bet, emb, batch, i);
    degrees[i] = adjacent[i].size();
    for (NodeIndex j : adjacent[i]) {
      if (auto it = local.find(j); it != local.end()) neighbors[i].push_back(it->second);
    }
  }
  batch.adjacency = NormalizedAdjacency::from_neighbors(neighbors, degrees);
  return batch;
}

}  // namespace aml
