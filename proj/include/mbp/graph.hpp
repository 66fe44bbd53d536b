#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mbp {

using NodeId = std::int32_t;

struct GenerationMeta {
  double edge_probability = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const GenerationMeta&, const GenerationMeta&) = default;
};

// Undirected simple unweighted graph on nodes 0..n-1. Immutable once built;
// edges are stored as sorted (i < j) pairs alongside sorted adjacency lists.
class Graph {
 public:
  using Edge = std::pair<NodeId, NodeId>;

  Graph() = default;

  // Accepts edges in either orientation; rejects self-loops, duplicates and
  // out-of-range endpoints.
  Graph(NodeId node_count, std::vector<Edge> edges,
        std::optional<GenerationMeta> meta = std::nullopt);

  NodeId node_count() const noexcept { return node_count_; }
  std::int64_t edge_count() const noexcept { return static_cast<std::int64_t>(edges_.size()); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const std::optional<GenerationMeta>& meta() const noexcept { return meta_; }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  NodeId degree(NodeId v) const noexcept {
    return static_cast<NodeId>(offsets_[v + 1] - offsets_[v]);
  }
  bool has_edge(NodeId a, NodeId b) const noexcept;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_ && a.meta_ == b.meta_;
  }

 private:
  NodeId node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::optional<GenerationMeta> meta_;
};

// G(n, p): one uniform draw per unordered pair in lexicographic (i < j)
// order from a Xoshiro256** stream seeded with `seed`.
Graph generate_er(NodeId n, double p, std::uint64_t seed);

double density(const Graph& g);
NodeId max_degree(const Graph& g);

// Small deterministic families used by tests and examples.
Graph path_graph(NodeId n);
Graph cycle_graph(NodeId n);
Graph complete_graph(NodeId n);
Graph star_graph(NodeId n);
Graph empty_graph(NodeId n);

// Edge-list text format:
//   # n=<n> p=<p> seed=<seed>      (optional generation metadata)
//   p el <n> <m>
//   <i> <j>                         (m lines, i < j)
void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

void save_graph(const Graph& g, const std::filesystem::path& path);
Graph load_graph(const std::filesystem::path& path);

// Throws InvalidArgument unless the graph is usable as a bisection instance.
void require_even_order(const Graph& g);

}  // namespace mbp
