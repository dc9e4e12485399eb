#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pushsum/error.hpp"

namespace pushsum {

/// Zero-based agent / augmented-node identifier. External formats (JSON, CSV)
/// use one-based ids; conversion happens only at the I/O boundary.
using NodeId = std::size_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;

  auto operator<=>(const Edge&) const = default;
};

namespace detail {

inline std::vector<bool> reachable_from(std::size_t n, std::span<const Edge> edges, NodeId start,
                                        bool reverse) {
  std::vector<std::vector<NodeId>> adj(n);
  for (const Edge& e : edges) {
    if (reverse) {
      adj[e.dst].push_back(e.src);
    } else {
      adj[e.src].push_back(e.dst);
    }
  }
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// True iff every ordered pair of the n nodes is joined by a directed path.
/// Edges must have endpoints in [0, n). A single node is strongly connected.
inline bool is_strongly_connected(std::size_t n, std::span<const Edge> edges) {
  if (n == 0) return false;
  const auto fwd = detail::reachable_from(n, edges, 0, false);
  const auto bwd = detail::reachable_from(n, edges, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

/// Fixed, strongly connected digraph without self-loops or parallel edges.
///
/// Edges are kept in lexicographic (src, dst) order; the position of an edge
/// in that order is its edge index and determines its virtual node in the
/// augmented graph. Instances are immutable once built.
class DirectedGraph {
 public:
  static DirectedGraph build(std::size_t n, std::vector<Edge> edges) {
    if (n == 0) throw Error(Errc::InvalidArgument, "graph needs at least one agent");
    for (const Edge& e : edges) {
      if (e.src >= n || e.dst >= n) {
        throw Error(Errc::EndpointOutOfRange, "edge (" + std::to_string(e.src + 1) + ", " +
                                                  std::to_string(e.dst + 1) + ") outside [1, " +
                                                  std::to_string(n) + "]");
      }
      if (e.src == e.dst) {
        throw Error(Errc::SelfLoop, "self-loop at agent " + std::to_string(e.src + 1));
      }
    }
    std::sort(edges.begin(), edges.end());
    if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
      throw Error(Errc::DuplicateEdge, "edge (" + std::to_string(dup->src + 1) + ", " +
                                           std::to_string(dup->dst + 1) + ") listed twice");
    }
    if (!is_strongly_connected(n, edges)) {
      throw Error(Errc::NotStronglyConnected, "graph on " + std::to_string(n) +
                                                  " agents is not strongly connected");
    }

    DirectedGraph g;
    g.n_ = n;
    g.edges_ = std::move(edges);
    g.in_.resize(n);
    g.out_.resize(n);
    for (const Edge& e : g.edges_) {
      g.out_[e.src].push_back(e.dst);
      g.in_[e.dst].push_back(e.src);
    }
    for (auto& v : g.in_) std::sort(v.begin(), v.end());
    return g;
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  std::size_t out_degree(NodeId i) const { return out_.at(i).size(); }
  std::span<const NodeId> out_neighbors(NodeId i) const { return out_.at(i); }
  std::span<const NodeId> in_neighbors(NodeId i) const { return in_.at(i); }

  std::size_t max_out_degree() const noexcept {
    std::size_t best = 0;
    for (const auto& o : out_) best = std::max(best, o.size());
    return best;
  }

  std::optional<std::size_t> edge_index(Edge e) const noexcept {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || *it != e) return std::nullopt;
    return static_cast<std::size_t>(it - edges_.begin());
  }

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  DirectedGraph() = default;

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> in_;
  std::vector<std::vector<NodeId>> out_;
};

inline DirectedGraph build_graph(std::size_t n, std::vector<Edge> edges) {
  return DirectedGraph::build(n, std::move(edges));
}

inline bool is_strongly_connected(const DirectedGraph& g) {
  return is_strongly_connected(g.size(), g.edges());
}

/// Base graph plus one buffer node per directed edge. Real agents keep ids
/// [0, n); the buffer node of the k-th edge (lexicographic) is n + k. The
/// buffer node of (i, j) has i as its only in-neighbor and j as its only
/// out-neighbor.
class AugmentedGraph {
 public:
  explicit AugmentedGraph(DirectedGraph base) : base_(std::move(base)) {}

  const DirectedGraph& base() const noexcept { return base_; }
  std::size_t real_count() const noexcept { return base_.size(); }
  std::size_t node_count() const noexcept { return base_.size() + base_.edge_count(); }
  bool is_virtual(NodeId v) const noexcept { return v >= base_.size(); }

  NodeId virtual_node(Edge e) const {
    auto k = base_.edge_index(e);
    if (!k) {
      throw Error(Errc::InvalidArgument, "(" + std::to_string(e.src + 1) + ", " +
                                             std::to_string(e.dst + 1) + ") is not an edge");
    }
    return base_.size() + *k;
  }

  Edge edge_of(NodeId v) const {
    if (!is_virtual(v) || v >= node_count()) {
      throw Error(Errc::InvalidArgument, "node " + std::to_string(v + 1) + " is not virtual");
    }
    return base_.edges()[v - base_.size()];
  }

 private:
  DirectedGraph base_;
};

inline AugmentedGraph augment(const DirectedGraph& g) { return AugmentedGraph(g); }

// JSON: { "n": int, "edges": [[i, j], ...] } with one-based ids.

inline DirectedGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.at("n").is_number_integer()) {
    throw Error(Errc::ConfigInvalid, "graph JSON needs an integer field 'n'");
  }
  const auto n = j.at("n").get<long long>();
  if (n < 1) throw Error(Errc::ConfigInvalid, "graph 'n' must be positive");
  std::vector<Edge> edges;
  if (j.contains("edges")) {
    for (const auto& pair : j.at("edges")) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer()) {
        throw Error(Errc::ConfigInvalid, "graph edges must be [i, j] integer pairs");
      }
      const auto a = pair[0].get<long long>();
      const auto b = pair[1].get<long long>();
      if (a < 1 || b < 1 || a > n || b > n) {
        throw Error(Errc::EndpointOutOfRange, "edge [" + std::to_string(a) + ", " +
                                                  std::to_string(b) + "] outside [1, " +
                                                  std::to_string(n) + "]");
      }
      edges.push_back({static_cast<NodeId>(a - 1), static_cast<NodeId>(b - 1)});
    }
  }
  return build_graph(static_cast<std::size_t>(n), std::move(edges));
}

inline nlohmann::json graph_to_json(const DirectedGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.src + 1, e.dst + 1});
  return {{"n", g.size()}, {"edges", std::move(edges)}};
}

}  // namespace pushsum
