#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "amlgraph/transaction.hpp"

namespace aml {

struct DecayParams {
  double alpha = 0.0;  // per second, >= 0
};

/// exp(-alpha * (now - then)). Throws Error("future transaction") when then > now.
double decay_weight(const DecayParams& p, Timestamp now, Timestamp then);

/// Topological features of one node: [in-degree, out-degree, betweenness, frequency].
struct NodeFeatures {
  double in_degree = 0;
  double out_degree = 0;
  double betweenness = 0;
  double frequency = 0;

  std::array<double, 4> as_array() const { return {in_degree, out_degree, betweenness, frequency}; }
  bool operator==(const NodeFeatures&) const = default;
};

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;
using BetweennessMap = std::unordered_map<std::string, double>;
using SharedEmbedding = std::shared_ptr<const std::vector<double>>;

struct Edge {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  double amount = 0;
  Timestamp timestamp = 0;
  std::string tx_id;
  std::string narrative;
  SharedEmbedding embedding;  // normalized narrative embedding, if the caller supplied one
};

class StaleTransaction : public Error {
 public:
  using Error::Error;
};

/// Dynamic directed multigraph over a sliding time window.
///
/// Degrees count multi-edges. Frequency is the decay-weighted count of edge
/// incidences (a self-loop counts once as in-edge and once as out-edge) and is
/// maintained per node as an accumulator anchored at the node's latest edge
/// time, so reading it at the current stream time is O(1). Copies are deep
/// (embeddings are shared, immutable) and serve as frozen snapshots.
class TransactionGraph {
 public:
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  explicit TransactionGraph(DecayParams decay = {}, double horizon_seconds = kUnbounded);

  /// Adds both endpoints if needed and appends a multi-edge. Stream time
  /// advances to max(now, tx.timestamp). Throws StaleTransaction when the
  /// transaction is already outside the window.
  EdgeIndex insert(const Transaction& tx, SharedEmbedding embedding = {});

  /// Creates a node with no edges (no-op if present).
  NodeIndex add_node(std::string_view id, Timestamp created);

  /// Drops edges older than the horizon and nodes left without edges.
  std::size_t prune();

  Timestamp now() const noexcept { return now_; }
  const DecayParams& decay() const noexcept { return decay_; }
  double horizon() const noexcept { return horizon_; }

  std::size_t node_count() const noexcept { return index_.size(); }
  std::size_t edge_count() const noexcept { return edges_by_time_.size(); }

  std::optional<NodeIndex> find(std::string_view id) const;
  NodeIndex require(std::string_view id) const;
  const std::string& node_id(NodeIndex n) const { return nodes_[n].id; }
  Timestamp node_created(NodeIndex n) const { return nodes_[n].created; }

  std::span<const EdgeIndex> in_edges(NodeIndex n) const { return nodes_[n].in; }
  std::span<const EdgeIndex> out_edges(NodeIndex n) const { return nodes_[n].out; }
  const Edge& edge(EdgeIndex e) const { return edges_[e]; }

  /// Live nodes in slot order (deterministic for a given operation sequence).
  std::vector<NodeIndex> nodes() const;
  /// Live edges in slot order.
  std::vector<EdgeIndex> edges() const;

  /// Distinct in- and out-neighbors, self excluded, ascending by index.
  std::vector<NodeIndex> neighbors(NodeIndex n) const;
  /// Distinct out-neighbors, self excluded, ascending by index.
  std::vector<NodeIndex> successors(NodeIndex n) const;

  std::size_t in_degree(NodeIndex n) const { return nodes_[n].in.size(); }
  std::size_t out_degree(NodeIndex n) const { return nodes_[n].out.size(); }
  /// Incrementally maintained decay-weighted incidence count at now().
  double frequency(NodeIndex n) const;

  /// Multiplicity of the directed multi-edge src -> dst.
  std::size_t multiplicity(std::string_view src, std::string_view dst) const;

 private:
  struct NodeSlot {
    std::string id;
    Timestamp created = 0;
    bool alive = false;
    std::vector<EdgeIndex> in;
    std::vector<EdgeIndex> out;
    double freq_acc = 0;     // sum of exp(-alpha * (freq_ref - t)) over incidences
    Timestamp freq_ref = 0;  // latest incidence time
  };

  NodeIndex ensure_node(std::string_view id, Timestamp created);
  void add_incidence(NodeSlot& node, Timestamp t);
  void recompute_frequency(NodeIndex n);
  void release_node(NodeIndex n);

  DecayParams decay_;
  double horizon_;
  Timestamp now_ = 0;
  bool started_ = false;

  std::vector<NodeSlot> nodes_;
  std::vector<NodeIndex> free_nodes_;
  std::unordered_map<std::string, NodeIndex> index_;

  std::vector<Edge> edges_;
  std::vector<bool> edge_alive_;
  std::vector<EdgeIndex> free_edges_;
  std::multimap<Timestamp, EdgeIndex> edges_by_time_;
};

/// Features of `node` at graph.now(); betweenness comes from `bet` (0 when absent).
NodeFeatures node_structural_features(const TransactionGraph& graph, std::string_view node, const BetweennessMap& bet);
NodeFeatures node_structural_features(const TransactionGraph& graph, NodeIndex node, const BetweennessMap& bet);

/// Debug export: {nodes:[{id, features}], edges:[{src,dst,amount,timestamp,delta}]}.
nlohmann::json snapshot_json(const TransactionGraph& graph, const BetweennessMap& bet);

}  // namespace aml
