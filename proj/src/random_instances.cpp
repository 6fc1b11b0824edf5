#include "amlgraph/random_instances.hpp"

#include <cmath>

namespace aml {

GraphBatch random_batch(std::size_t nodes, std::size_t embed_dim, double edge_prob, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GraphBatch batch;
  batch.structural = Matrix(nodes, kStructuralInputs);
  batch.narrative = Matrix(nodes, embed_dim);
  std::vector<std::vector<std::size_t>> neighbors(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    batch.node_ids.push_back("n" + std::to_string(i));
    for (double& v : batch.structural.row(i)) v = 3.0 * unit(rng);
    double norm = 0.0;
    for (double& v : batch.narrative.row(i)) {
      v = gauss(rng);
      norm += v * v;
    }
    for (double& v : batch.narrative.row(i)) v /= std::sqrt(norm);
    batch.examples.push_back({i, static_cast<int>(i % 2)});
    for (std::size_t j = 0; j < i; ++j) {
      if (unit(rng) < edge_prob) {
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
  }
  batch.adjacency = NormalizedAdjacency::from_neighbors(neighbors);
  return batch;
}

ModelDims random_small_dims(std::size_t max_width, std::size_t max_layers, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> width(2, max_width);
  std::uniform_int_distribution<std::size_t> layers(1, max_layers);
  ModelDims d;
  d.struct_width = width(rng);
  d.embed_dim = width(rng);
  d.fused_width = width(rng);
  d.hidden_width = width(rng);
  d.layers = layers(rng);
  return d;
}

}  // namespace aml
