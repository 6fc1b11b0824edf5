#pragma once

#include <random>

#include "amlgraph/model.hpp"

namespace aml {

/// Random connected-or-not graph batch for gradient checks and oracle
/// comparisons: `nodes` rows, random undirected edges with probability
/// `edge_prob`, structural inputs in [0, 3), unit-norm narratives, and one example
/// per row with alternating labels so both classes appear.
GraphBatch random_batch(std::size_t nodes, std::size_t embed_dim, double edge_prob, std::mt19937_64& rng);

/// Small random model dimensions (every width in [2, max_width]).
ModelDims random_small_dims(std::size_t max_width, std::size_t max_layers, std::mt19937_64& rng);

}  // namespace aml
