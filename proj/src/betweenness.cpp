#include "amlgraph/betweenness.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace aml {

Digraph Digraph::from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::pair<std::size_t, std::size_t>> simple;
  simple.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw Error("edge endpoint out of range");
    if (u != v) simple.emplace_back(u, v);
  }
  std::sort(simple.begin(), simple.end());
  simple.erase(std::unique(simple.begin(), simple.end()), simple.end());

  Digraph g;
  g.n = n;
  g.offsets.assign(n + 1, 0);
  for (const auto& [u, _] : simple) ++g.offsets[u + 1];
  std::partial_sum(g.offsets.begin(), g.offsets.end(), g.offsets.begin());
  g.targets.reserve(simple.size());
  for (const auto& [_, v] : simple) g.targets.push_back(v);
  return g;
}

std::vector<double> brandes(const Digraph& g, const std::vector<std::size_t>* sources) {
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  const std::size_t n = g.n;
  std::vector<double> centrality(n, 0.0);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::size_t> dist(n);
  std::vector<std::size_t> order;  // vertices in non-decreasing distance
  order.reserve(n);

  auto run = [&](std::size_t s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), kUnseen);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      std::size_t v = order[head];
      for (std::size_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
        std::size_t w = g.targets[i];
        if (dist[w] == kUnseen) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    // Predecessors are recovered from distances instead of stored lists.
    for (std::size_t k = order.size(); k-- > 0;) {
      std::size_t v = order[k];
      for (std::size_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
        std::size_t w = g.targets[i];
        if (dist[w] == dist[v] + 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (v != s) centrality[v] += delta[v];
    }
  };

  if (sources == nullptr) {
    for (std::size_t s = 0; s < n; ++s) run(s);
  } else {
    std::vector<std::size_t> sorted = *sources;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t s : sorted) {
      if (s >= n) throw Error("betweenness source out of range");
      run(s);
    }
  }
  return centrality;
}

BetweennessMap betweenness_all(const TransactionGraph& graph, std::optional<std::size_t> sample_sources,
                               std::uint64_t seed) {
  if (graph.node_count() == 0) throw Error("betweenness of an empty graph");
  if (sample_sources && *sample_sources == 0) throw Error("sample_sources must be >= 1");

  const auto live = graph.nodes();
  std::vector<std::size_t> dense(live.empty() ? 0 : live.back() + 1, 0);
  for (std::size_t i = 0; i < live.size(); ++i) dense[live[i]] = i;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(graph.edge_count());
  for (EdgeIndex e : graph.edges()) {
    const Edge& edge = graph.edge(e);
    pairs.emplace_back(dense[edge.src], dense[edge.dst]);
  }
  Digraph g = Digraph::from_edges(live.size(), pairs);

  std::vector<double> scores;
  if (!sample_sources || *sample_sources >= live.size()) {
    scores = brandes(g);
  } else {
    std::vector<std::size_t> all(live.size());
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(*sample_sources);
    scores = brandes(g, &all);
    const double scale = static_cast<double>(live.size()) / static_cast<double>(*sample_sources);
    for (double& s : scores) s *= scale;
  }

  BetweennessMap out;
  out.reserve(live.size());
  for (std::size_t i = 0; i < live.size(); ++i) out.emplace(graph.node_id(live[i]), scores[i]);
  return out;
}

}  // namespace aml
