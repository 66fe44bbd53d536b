#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mbp/error.hpp"
#include "mbp/rng.hpp"
#include "mbp/solvers.hpp"

namespace mbp {

namespace {

using Weight = std::int64_t;

// Allowed part weight during coarse refinement, as a fraction above n/2.
// Exact balance is restored at the end.
constexpr double kImbalanceTolerance = 0.03;
constexpr NodeId kExhaustiveInitialLimit = 20;
constexpr int kGrowingTrials = 4;
constexpr int kMaxRefinementPasses = 10;
constexpr int kStallMoves = 100;

struct WeightedGraph {
  std::vector<Weight> node_weight;
  std::vector<std::size_t> offsets{0};
  std::vector<NodeId> targets;
  std::vector<Weight> edge_weight;

  NodeId size() const noexcept { return static_cast<NodeId>(node_weight.size()); }
  std::size_t begin(NodeId v) const noexcept { return offsets[v]; }
  std::size_t end(NodeId v) const noexcept { return offsets[v + 1]; }
};

WeightedGraph from_graph(const Graph& g) {
  WeightedGraph wg;
  const NodeId n = g.node_count();
  wg.node_weight.assign(static_cast<std::size_t>(n), 1);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : g.neighbors(v)) {
      wg.targets.push_back(u);
      wg.edge_weight.push_back(1);
    }
    wg.offsets.push_back(wg.targets.size());
  }
  return wg;
}

struct Level {
  WeightedGraph graph;
  std::vector<NodeId> to_coarse;  // fine node -> coarse node of the next level
};

// Randomized heavy-edge matching followed by contraction. Returns false
// when matching no longer shrinks the graph meaningfully.
bool coarsen(const WeightedGraph& fine, Weight max_node_weight, Xoshiro256& rng, WeightedGraph& coarse,
             std::vector<NodeId>& to_coarse) {
  const NodeId n = fine.size();
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<NodeId>(order));

  std::vector<NodeId> mate(static_cast<std::size_t>(n), -1);
  to_coarse.assign(static_cast<std::size_t>(n), -1);
  NodeId coarse_count = 0;
  for (NodeId u : order) {
    if (mate[u] >= 0) continue;
    NodeId pick = u;
    Weight heaviest = 0;
    for (std::size_t e = fine.begin(u); e < fine.end(u); ++e) {
      const NodeId v = fine.targets[e];
      if (mate[v] >= 0 || v == u) continue;
      if (fine.node_weight[u] + fine.node_weight[v] > max_node_weight) continue;
      if (fine.edge_weight[e] > heaviest || (fine.edge_weight[e] == heaviest && v < pick)) {
        heaviest = fine.edge_weight[e];
        pick = v;
      }
    }
    mate[u] = pick;
    mate[pick] = u;
    to_coarse[u] = to_coarse[pick] = coarse_count++;
  }
  if (static_cast<double>(coarse_count) > 0.95 * static_cast<double>(n)) return false;

  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(coarse_count));
  for (NodeId v = 0; v < n; ++v) members[to_coarse[v]].push_back(v);

  coarse = WeightedGraph{};
  coarse.node_weight.assign(static_cast<std::size_t>(coarse_count), 0);
  std::vector<Weight> accum(static_cast<std::size_t>(coarse_count), 0);
  std::vector<NodeId> touched;
  for (NodeId c = 0; c < coarse_count; ++c) {
    touched.clear();
    for (NodeId v : members[c]) {
      coarse.node_weight[c] += fine.node_weight[v];
      for (std::size_t e = fine.begin(v); e < fine.end(v); ++e) {
        const NodeId t = to_coarse[fine.targets[e]];
        if (t == c) continue;
        if (accum[t] == 0) touched.push_back(t);
        accum[t] += fine.edge_weight[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (NodeId t : touched) {
      coarse.targets.push_back(t);
      coarse.edge_weight.push_back(accum[t]);
      accum[t] = 0;
    }
    coarse.offsets.push_back(coarse.targets.size());
  }
  return true;
}

// Two-way partition state with per-node gains (external - internal weight).
class Bisection {
 public:
  Bisection(const WeightedGraph& g, std::vector<std::uint8_t> side, Weight max_part)
      : g_(g), side_(std::move(side)), max_part_(max_part) {
    gain_.assign(side_.size(), 0);
    for (NodeId v = 0; v < g_.size(); ++v) {
      part_weight_[side_[v]] += g_.node_weight[v];
      for (std::size_t e = g_.begin(v); e < g_.end(v); ++e) {
        const Weight w = g_.edge_weight[e];
        if (side_[g_.targets[e]] != side_[v]) {
          gain_[v] += w;
          cut_ += w;
        } else {
          gain_[v] -= w;
        }
      }
    }
    cut_ /= 2;
  }

  Weight cut() const noexcept { return cut_; }
  Weight violation() const noexcept {
    return std::max<Weight>(0, std::max(part_weight_[0], part_weight_[1]) - max_part_);
  }
  Weight part_weight(int side) const noexcept { return part_weight_[side]; }
  const std::vector<std::uint8_t>& sides() const noexcept { return side_; }
  Weight gain(NodeId v) const noexcept { return gain_[v]; }
  int side(NodeId v) const noexcept { return side_[v]; }

  bool move_allowed(NodeId v) const noexcept {
    const int from = side_[v];
    const Weight w = g_.node_weight[v];
    const Weight to_after = part_weight_[1 - from] + w;
    if (to_after <= max_part_) return true;
    // While out of tolerance, moves off the heavier side are always allowed.
    return part_weight_[from] > max_part_ && to_after < part_weight_[from];
  }

  void move(NodeId v) noexcept {
    const int from = side_[v];
    cut_ -= gain_[v];
    part_weight_[from] -= g_.node_weight[v];
    part_weight_[1 - from] += g_.node_weight[v];
    side_[v] = static_cast<std::uint8_t>(1 - from);
    gain_[v] = -gain_[v];
    for (std::size_t e = g_.begin(v); e < g_.end(v); ++e) {
      const NodeId u = g_.targets[e];
      const Weight w = g_.edge_weight[e];
      gain_[u] += side_[u] == from ? 2 * w : -2 * w;
    }
  }

 private:
  const WeightedGraph& g_;
  std::vector<std::uint8_t> side_;
  Weight max_part_;
  std::vector<Weight> gain_;
  Weight part_weight_[2] = {0, 0};
  Weight cut_ = 0;
};

bool better(Weight violation_a, Weight cut_a, Weight violation_b, Weight cut_b) {
  return violation_a != violation_b ? violation_a < violation_b : cut_a < cut_b;
}

// Fiduccia-Mattheyses style passes: single-node moves by best gain under
// the weight tolerance, each node moved at most once per pass, rolled back
// to the best prefix.
void refine(Bisection& part, const WeightedGraph& g) {
  const NodeId n = g.size();
  std::vector<std::uint8_t> locked(static_cast<std::size_t>(n));
  std::vector<NodeId> moves;
  for (int pass = 0; pass < kMaxRefinementPasses; ++pass) {
    std::fill(locked.begin(), locked.end(), 0);
    moves.clear();
    Weight best_violation = part.violation();
    Weight best_cut = part.cut();
    std::size_t best_prefix = 0;
    for (NodeId step = 0; step < n; ++step) {
      NodeId pick = -1;
      for (NodeId v = 0; v < n; ++v) {
        if (locked[v] || !part.move_allowed(v)) continue;
        if (pick < 0 || part.gain(v) > part.gain(pick)) pick = v;
      }
      if (pick < 0) break;
      part.move(pick);
      locked[pick] = 1;
      moves.push_back(pick);
      if (better(part.violation(), part.cut(), best_violation, best_cut)) {
        best_violation = part.violation();
        best_cut = part.cut();
        best_prefix = moves.size();
      } else if (moves.size() - best_prefix > static_cast<std::size_t>(kStallMoves)) {
        break;
      }
    }
    for (std::size_t k = moves.size(); k > best_prefix; --k) part.move(moves[k - 1]);
    if (best_prefix == 0) break;
  }
}

std::vector<std::uint8_t> exhaustive_initial(const WeightedGraph& g, Weight max_part) {
  const NodeId n = g.size();
  std::vector<std::uint8_t> side(static_cast<std::size_t>(n), 0);
  side[0] = 1;
  Bisection state(g, side, max_part);
  Weight best_violation = state.violation();
  Weight best_cut = state.cut();
  std::vector<std::uint8_t> best = state.sides();
  const std::uint64_t total = std::uint64_t{1} << (n - 1);
  for (std::uint64_t step = 1; step < total; ++step) {
    state.move(static_cast<NodeId>(std::countr_zero(step) + 1));
    if (better(state.violation(), state.cut(), best_violation, best_cut)) {
      best_violation = state.violation();
      best_cut = state.cut();
      best = state.sides();
    }
  }
  return best;
}

// Grows S1 from a random node, always absorbing the node whose move
// increases the cut least, until S1 reaches half the total weight.
std::vector<std::uint8_t> grown_initial(const WeightedGraph& g, Weight half, Weight max_part,
                                        Xoshiro256& rng) {
  const NodeId n = g.size();
  std::vector<std::uint8_t> best_sides;
  Weight best_violation = 0, best_cut = 0;
  for (int trial = 0; trial < kGrowingTrials; ++trial) {
    Bisection state(g, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0), max_part);
    state.move(static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n))));
    while (state.part_weight(1) < half) {
      NodeId pick = -1;
      for (NodeId v = 0; v < n; ++v) {
        if (state.side(v) == 1) continue;
        if (pick < 0 || state.gain(v) > state.gain(pick)) pick = v;
      }
      if (pick < 0) break;
      state.move(pick);
    }
    refine(state, g);
    if (best_sides.empty() || better(state.violation(), state.cut(), best_violation, best_cut)) {
      best_violation = state.violation();
      best_cut = state.cut();
      best_sides = state.sides();
    }
  }
  return best_sides;
}

}  // namespace

SolveResult solve_multilevel(const Graph& g, std::uint64_t seed) {
  require_even_order(g);
  const auto start = std::chrono::steady_clock::now();
  const NodeId n = g.node_count();
  const Weight half = n / 2;
  const Weight max_part =
      std::max<Weight>(half, static_cast<Weight>(std::floor((1.0 + kImbalanceTolerance) * half)));
  const Weight max_node_weight =
      std::max<Weight>(1, static_cast<Weight>(std::ceil(1.5 * n / static_cast<double>(kCoarsestTarget))));
  Xoshiro256 rng(seed);

  std::vector<Level> levels;
  levels.push_back({from_graph(g), {}});
  while (levels.back().graph.size() > kCoarsestTarget) {
    WeightedGraph coarse;
    std::vector<NodeId> to_coarse;
    if (!coarsen(levels.back().graph, max_node_weight, rng, coarse, to_coarse)) break;
    levels.back().to_coarse = std::move(to_coarse);
    levels.push_back({std::move(coarse), {}});
  }

  const WeightedGraph& coarsest = levels.back().graph;
  std::vector<std::uint8_t> sides = coarsest.size() <= kExhaustiveInitialLimit
                                        ? exhaustive_initial(coarsest, max_part)
                                        : grown_initial(coarsest, half, max_part, rng);
  for (std::size_t k = levels.size(); k-- > 0;) {
    const WeightedGraph& level = levels[k].graph;
    if (k + 1 < levels.size()) {
      std::vector<std::uint8_t> projected(static_cast<std::size_t>(level.size()));
      for (NodeId v = 0; v < level.size(); ++v) projected[v] = sides[levels[k].to_coarse[v]];
      sides = std::move(projected);
    }
    Bisection state(level, std::move(sides), max_part);
    refine(state, level);
    sides = state.sides();
  }

  Bisection finest(levels.front().graph, std::move(sides), half);
  SolveResult result;
  result.solver_id = "multilevel";
  result.pre_repair_cut = finest.cut();
  result.pre_repair_balanced = finest.part_weight(1) == half;

  // Exact balance: move nodes off the heavier side, cheapest first.
  while (finest.part_weight(1) != half) {
    const int heavy = finest.part_weight(1) > half ? 1 : 0;
    NodeId pick = -1;
    for (NodeId v = 0; v < n; ++v) {
      if (finest.side(v) != heavy) continue;
      if (pick < 0 || finest.gain(v) > finest.gain(pick)) pick = v;
    }
    finest.move(pick);
  }

  result.assignment = PartitionAssignment(n);
  for (NodeId v = 0; v < n; ++v) result.assignment[v] = finest.side(v);
  result.seed = seed;
  result.iterations = static_cast<std::int64_t>(levels.size());
  attach_graph_metrics(result, g);
  result.energy = static_cast<double>(*result.inter_edges);
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace mbp
