#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mbp/error.hpp"
#include "mbp/rng.hpp"
#include "mbp/solvers.hpp"

namespace mbp {

namespace {

// Dense 0/1 adjacency for O(1) pair lookups during swap selection.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(const Graph& g)
      : n_(g.node_count()), bits_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0) {
    for (const auto& [a, b] : g.edges()) {
      bits_[index(a, b)] = 1;
      bits_[index(b, a)] = 1;
    }
  }
  int operator()(NodeId a, NodeId b) const noexcept { return bits_[index(a, b)]; }

 private:
  std::size_t index(NodeId a, NodeId b) const noexcept {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b);
  }
  NodeId n_;
  std::vector<std::uint8_t> bits_;
};

struct Swap {
  NodeId a = -1;  // leaves S1
  NodeId b = -1;  // leaves S0
  std::int64_t gain = 0;
};

// Best unlocked pair by gain D_a + D_b - 2 A(a, b), lowest (a, b) on ties.
// Candidates are scanned in descending D so the search stops as soon as the
// upper bound D_a + D_b falls below the best gain found.
Swap best_swap(const std::vector<NodeId>& side1, const std::vector<NodeId>& side0,
               const std::vector<std::int64_t>& d, const AdjacencyMatrix& adj) {
  Swap best;
  bool found = false;
  for (NodeId a : side1) {
    if (found && d[a] + d[side0.front()] < best.gain) break;
    for (NodeId b : side0) {
      const std::int64_t bound = d[a] + d[b];
      if (found && bound < best.gain) break;
      const std::int64_t gain = bound - 2 * adj(a, b);
      if (!found || gain > best.gain || (gain == best.gain && (a < best.a || (a == best.a && b < best.b)))) {
        best = {a, b, gain};
        found = true;
      }
    }
  }
  return best;
}

void sort_by_gain(std::vector<NodeId>& nodes, const std::vector<std::int64_t>& d) {
  std::sort(nodes.begin(), nodes.end(), [&](NodeId u, NodeId v) { return d[u] != d[v] ? d[u] > d[v] : u < v; });
}

}  // namespace

KlOutcome kernighan_lin_refine(const Graph& g, PartitionAssignment start) {
  require_even_order(g);
  const NodeId n = g.node_count();
  if (start.size() != n) throw InvalidArgument("kl: start assignment length mismatch");
  if (balance_deviation(start) != 0) throw InvalidArgument("kl: start assignment must be balanced");

  const AdjacencyMatrix adj(g);
  KlOutcome out;
  out.assignment = std::move(start);
  std::int64_t cut = e_cut(g, out.assignment);
  out.cut_trace.push_back(cut);

  std::vector<std::int64_t> d(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> locked(static_cast<std::size_t>(n));
  std::vector<Swap> swaps;
  for (;;) {
    ++out.passes;
    // D_v = external - internal degree.
    for (NodeId v = 0; v < n; ++v) {
      std::int64_t external = 0;
      for (NodeId u : g.neighbors(v)) external += out.assignment[u] != out.assignment[v];
      d[v] = 2 * external - g.degree(v);
    }
    std::fill(locked.begin(), locked.end(), 0);
    swaps.clear();

    std::vector<NodeId> side1, side0;
    for (NodeId v = 0; v < n; ++v) (out.assignment[v] ? side1 : side0).push_back(v);
    for (NodeId step = 0; step < n / 2; ++step) {
      sort_by_gain(side1, d);
      sort_by_gain(side0, d);
      const Swap s = best_swap(side1, side0, d, adj);
      swaps.push_back(s);
      locked[s.a] = locked[s.b] = 1;
      std::erase(side1, s.a);
      std::erase(side0, s.b);
      // Gains of the remaining nodes as if a and b had been exchanged.
      for (NodeId v : side1) d[v] += 2 * adj(v, s.a) - 2 * adj(v, s.b);
      for (NodeId v : side0) d[v] += 2 * adj(v, s.b) - 2 * adj(v, s.a);
    }

    std::int64_t prefix = 0, best_prefix = 0;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < swaps.size(); ++k) {
      prefix += swaps[k].gain;
      if (prefix > best_prefix) {
        best_prefix = prefix;
        best_k = k + 1;
      }
    }
    if (best_prefix <= 0) {
      out.cut_trace.push_back(cut);
      break;
    }
    for (std::size_t k = 0; k < best_k; ++k) {
      out.assignment[swaps[k].a] = 0;
      out.assignment[swaps[k].b] = 1;
    }
    cut -= best_prefix;
    out.cut_trace.push_back(cut);
    ++out.improving_passes;
  }
  return out;
}

SolveResult solve_kl(const Graph& g, std::uint64_t seed) {
  require_even_order(g);
  const auto start = std::chrono::steady_clock::now();
  const NodeId n = g.node_count();
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Xoshiro256 rng(seed);
  rng.shuffle(std::span<NodeId>(order));
  PartitionAssignment initial = PartitionAssignment::Zero(n);
  for (NodeId k = 0; k < n / 2; ++k) initial[order[static_cast<std::size_t>(k)]] = 1;

  KlOutcome outcome = kernighan_lin_refine(g, std::move(initial));
  SolveResult result;
  result.solver_id = "kl";
  result.assignment = std::move(outcome.assignment);
  result.cut_trace = std::move(outcome.cut_trace);
  result.iterations = outcome.passes;
  result.seed = seed;
  attach_graph_metrics(result, g);
  result.energy = static_cast<double>(*result.inter_edges);
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace mbp
