#include "amlgraph/graph.hpp"

#include <algorithm>
#include <cmath>

namespace aml {

double decay_weight(const DecayParams& p, Timestamp now, Timestamp then) {
  if (then > now) throw Error("future transaction");
  if (p.alpha < 0) throw Error("decay rate alpha must be >= 0");
  return std::exp(-p.alpha * static_cast<double>(now - then));
}

TransactionGraph::TransactionGraph(DecayParams decay, double horizon_seconds)
    : decay_(decay), horizon_(horizon_seconds) {
  if (decay.alpha < 0) throw Error("decay rate alpha must be >= 0");
  if (!(horizon_seconds >= 0)) throw Error("window horizon must be >= 0");
}

std::optional<NodeIndex> TransactionGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex TransactionGraph::require(std::string_view id) const {
  auto n = find(id);
  if (!n) throw Error("unknown node: " + std::string(id));
  return *n;
}

NodeIndex TransactionGraph::ensure_node(std::string_view id, Timestamp created) {
  if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
  NodeIndex n;
  if (!free_nodes_.empty()) {
    n = free_nodes_.back();
    free_nodes_.pop_back();
  } else {
    n = static_cast<NodeIndex>(nodes_.size());
    nodes_.emplace_back();
  }
  NodeSlot& slot = nodes_[n];
  slot = NodeSlot{};
  slot.id = std::string(id);
  slot.created = created;
  slot.alive = true;
  slot.freq_ref = created;
  index_.emplace(slot.id, n);
  return n;
}

NodeIndex TransactionGraph::add_node(std::string_view id, Timestamp created) {
  if (!started_ || created > now_) {
    now_ = started_ ? std::max(now_, created) : created;
    started_ = true;
  }
  return ensure_node(id, created);
}

void TransactionGraph::add_incidence(NodeSlot& node, Timestamp t) {
  const double a = decay_.alpha;
  if (node.freq_acc == 0.0) {
    node.freq_ref = t;
    node.freq_acc = 1.0;
  } else if (t > node.freq_ref) {
    node.freq_acc = node.freq_acc * std::exp(-a * static_cast<double>(t - node.freq_ref)) + 1.0;
    node.freq_ref = t;
  } else {
    node.freq_acc += std::exp(-a * static_cast<double>(node.freq_ref - t));
  }
}

EdgeIndex TransactionGraph::insert(const Transaction& tx, SharedEmbedding embedding) {
  if (started_ && static_cast<double>(now_ - tx.timestamp) > horizon_) {
    throw StaleTransaction("stale transaction: " + tx.tx_id + " is older than the window horizon");
  }
  now_ = started_ ? std::max(now_, tx.timestamp) : tx.timestamp;
  started_ = true;

  NodeIndex src = ensure_node(tx.sender, tx.timestamp);
  NodeIndex dst = ensure_node(tx.receiver, tx.timestamp);

  EdgeIndex e;
  if (!free_edges_.empty()) {
    e = free_edges_.back();
    free_edges_.pop_back();
  } else {
    e = static_cast<EdgeIndex>(edges_.size());
    edges_.emplace_back();
    edge_alive_.push_back(false);
  }
  edges_[e] = Edge{src, dst, tx.amount, tx.timestamp, tx.tx_id, tx.narrative, std::move(embedding)};
  edge_alive_[e] = true;
  edges_by_time_.emplace(tx.timestamp, e);

  nodes_[src].out.push_back(e);
  nodes_[dst].in.push_back(e);
  add_incidence(nodes_[src], tx.timestamp);
  add_incidence(nodes_[dst], tx.timestamp);
  return e;
}

void TransactionGraph::recompute_frequency(NodeIndex n) {
  NodeSlot& node = nodes_[n];
  Timestamp ref = node.created;
  bool any = false;
  for (const auto* list : {&node.in, &node.out}) {
    for (EdgeIndex e : *list) {
      ref = any ? std::max(ref, edges_[e].timestamp) : edges_[e].timestamp;
      any = true;
    }
  }
  double acc = 0.0;
  for (const auto* list : {&node.in, &node.out}) {
    for (EdgeIndex e : *list) acc += std::exp(-decay_.alpha * static_cast<double>(ref - edges_[e].timestamp));
  }
  node.freq_ref = ref;
  node.freq_acc = acc;
}

void TransactionGraph::release_node(NodeIndex n) {
  index_.erase(nodes_[n].id);
  nodes_[n] = NodeSlot{};
  free_nodes_.push_back(n);
}

std::size_t TransactionGraph::prune() {
  if (std::isinf(horizon_) || edges_by_time_.empty()) return 0;
  std::vector<NodeIndex> touched;
  std::size_t removed = 0;
  auto it = edges_by_time_.begin();
  while (it != edges_by_time_.end() && static_cast<double>(now_ - it->first) > horizon_) {
    EdgeIndex e = it->second;
    Edge& edge = edges_[e];
    auto& out = nodes_[edge.src].out;
    out.erase(std::find(out.begin(), out.end(), e));
    auto& in = nodes_[edge.dst].in;
    in.erase(std::find(in.begin(), in.end(), e));
    touched.push_back(edge.src);
    touched.push_back(edge.dst);
    edge = Edge{};
    edge_alive_[e] = false;
    free_edges_.push_back(e);
    it = edges_by_time_.erase(it);
    ++removed;
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (NodeIndex n : touched) {
    if (nodes_[n].in.empty() && nodes_[n].out.empty()) {
      release_node(n);
    } else {
      recompute_frequency(n);
    }
  }
  return removed;
}

std::vector<NodeIndex> TransactionGraph::nodes() const {
  std::vector<NodeIndex> out;
  out.reserve(index_.size());
  for (NodeIndex n = 0; n < nodes_.size(); ++n) {
    if (nodes_[n].alive) out.push_back(n);
  }
  return out;
}

std::vector<EdgeIndex> TransactionGraph::edges() const {
  std::vector<EdgeIndex> out;
  out.reserve(edges_by_time_.size());
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    if (edge_alive_[e]) out.push_back(e);
  }
  return out;
}

std::vector<NodeIndex> TransactionGraph::neighbors(NodeIndex n) const {
  const NodeSlot& node = nodes_[n];
  std::vector<NodeIndex> out;
  out.reserve(node.in.size() + node.out.size());
  for (EdgeIndex e : node.in) out.push_back(edges_[e].src);
  for (EdgeIndex e : node.out) out.push_back(edges_[e].dst);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (auto self = std::lower_bound(out.begin(), out.end(), n); self != out.end() && *self == n) out.erase(self);
  return out;
}

std::vector<NodeIndex> TransactionGraph::successors(NodeIndex n) const {
  std::vector<NodeIndex> out;
  out.reserve(nodes_[n].out.size());
  for (EdgeIndex e : nodes_[n].out) {
    if (edges_[e].dst != n) out.push_back(edges_[e].dst);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double TransactionGraph::frequency(NodeIndex n) const {
  const NodeSlot& node = nodes_[n];
  if (node.freq_acc == 0.0) return 0.0;
  return node.freq_acc * std::exp(-decay_.alpha * static_cast<double>(now_ - node.freq_ref));
}

std::size_t TransactionGraph::multiplicity(std::string_view src, std::string_view dst) const {
  auto s = find(src);
  auto d = find(dst);
  if (!s || !d) return 0;
  std::size_t count = 0;
  for (EdgeIndex e : nodes_[*s].out) count += edges_[e].dst == *d;
  return count;
}

NodeFeatures node_structural_features(const TransactionGraph& graph, NodeIndex node, const BetweennessMap& bet) {
  NodeFeatures f;
  f.in_degree = static_cast<double>(graph.in_degree(node));
  f.out_degree = static_cast<double>(graph.out_degree(node));
  if (auto it = bet.find(graph.node_id(node)); it != bet.end()) f.betweenness = it->second;
  f.frequency = graph.frequency(node);
  return f;
}

NodeFeatures node_structural_features(const TransactionGraph& graph, std::string_view node, const BetweennessMap& bet) {
  return node_structural_features(graph, graph.require(node), bet);
}

nlohmann::json snapshot_json(const TransactionGraph& graph, const BetweennessMap& bet) {
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeIndex n : graph.nodes()) {
    auto f = node_structural_features(graph, n, bet);
    nodes.push_back({{"id", graph.node_id(n)},
                     {"features",
                      {{"in_degree", f.in_degree},
                       {"out_degree", f.out_degree},
                       {"betweenness", f.betweenness},
                       {"frequency", f.frequency}}}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (EdgeIndex e : graph.edges()) {
    const Edge& edge = graph.edge(e);
    edges.push_back({{"src", graph.node_id(edge.src)},
                     {"dst", graph.node_id(edge.dst)},
                     {"amount", edge.amount},
                     {"timestamp", edge.timestamp},
                     {"delta", decay_weight(graph.decay(), graph.now(), edge.timestamp)}});
  }
  return {{"now", graph.now()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

}  // namespace aml
