#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mbp/graph.hpp"
#include "mbp/qubo.hpp"

namespace mbp {

struct SolveResult {
  PartitionAssignment assignment;
  // QUBO energy including the offset (= E_MBP for a bisection QUBO); for
  // graph-native solvers, E_MBP under the request's lambda, or the cut when
  // no lambda was given.
  double energy = 0.0;
  // Filled whenever the graph is known (always through the registry).
  std::optional<std::int64_t> inter_edges;
  std::int64_t balance_deviation = 0;
  bool balanced = false;
  std::string solver_id;
  std::chrono::nanoseconds wall_time{0};
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations;
  // Kernighan-Lin: cut before the first pass and after every pass.
  std::vector<std::int64_t> cut_trace;
  // Multilevel: partition quality before the exact-balance repair.
  std::optional<std::int64_t> pre_repair_cut;
  std::optional<bool> pre_repair_balanced;
};

// Fills inter_edges and the balance fields from the graph.
void attach_graph_metrics(SolveResult& result, const Graph& g);

struct SaParams {
  int sweeps = 2000;
  int restarts = 8;
  std::optional<double> t_initial;  // nullopt: automatic
  double cooling = 0.97;            // per sweep, geometric
  std::optional<double> t_final;    // nullopt: 1e-3 * t_initial

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
};

// Exhaustive search over all 2^n assignments; ties go to the smallest
// sum_i x_i 2^i. Energy includes the offset.
inline constexpr NodeId kExactQuboMaxNodes = 24;
SolveResult solve_exact_qubo(const QuboMatrix& q);

// Exhaustive search over balanced assignments with node 0 fixed in S1.
inline constexpr NodeId kExactBisectionMaxNodes = 24;
SolveResult solve_exact_bisection(const Graph& g);

// Simulated annealing over a dense QUBO. Each restart r uses the stream
// seeded with seed ^ r: a random start, then `sweeps` in-order passes of
// single-bit Metropolis proposals (one uniform draw per proposal), cooling
// t <- max(t * cooling, t_final) after every sweep. The automatic initial
// temperature is the 95th percentile of |dE| over 1000 random single flips
// from the start state.
SolveResult solve_sa(const QuboMatrix& q, const SaParams& params, std::uint64_t seed);

// Same move sequence as solve_sa on build_mbp_qubo(g, lambda), with dE taken
// from adjacency and a running set size instead of the dense matrix.
SolveResult solve_sa_mbp(const Graph& g, double lambda, const SaParams& params, std::uint64_t seed);

// Balanced Kernighan-Lin from a random equal-size split.
SolveResult solve_kl(const Graph& g, std::uint64_t seed);

struct KlOutcome {
  PartitionAssignment assignment;
  std::vector<std::int64_t> cut_trace;  // initial cut, then after each pass
  int passes = 0;
  int improving_passes = 0;
};

// Kernighan-Lin passes from a given balanced start. Among equal-gain swaps
// the pair with the lowest (a, b), a taken from S1, wins.
KlOutcome kernighan_lin_refine(const Graph& g, PartitionAssignment start);

// Multilevel bisection: heavy-edge matching down to <= 32 supernodes,
// initial split of the coarsest graph, boundary refinement on the way up,
// then exact balance repair.
inline constexpr NodeId kCoarsestTarget = 32;
SolveResult solve_multilevel(const Graph& g, std::uint64_t seed);

struct SolverCapabilities {
  NodeId max_nodes = std::numeric_limits<NodeId>::max();
  bool requires_qubo = false;   // consumes a prebuilt QuboMatrix
  bool requires_lambda = false; // needs a penalty parameter
  bool deterministic = false;   // result independent of the seed
};

struct SolveRequest {
  const Graph& graph;
  const QuboMatrix* qubo = nullptr;  // built on demand when absent
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  SaParams sa{};
};

class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual SolverCapabilities capabilities() const = 0;
  virtual SolveResult solve(const SolveRequest& request) const = 0;
};

// Wraps a callable as a backend.
class FunctionBackend final : public SolverBackend {
 public:
  using Fn = std::function<SolveResult(const SolveRequest&)>;
  FunctionBackend(SolverCapabilities caps, Fn fn) : caps_(caps), fn_(std::move(fn)) {}
  SolverCapabilities capabilities() const override { return caps_; }
  SolveResult solve(const SolveRequest& request) const override { return fn_(request); }

 private:
  SolverCapabilities caps_;
  Fn fn_;
};

class SolverRegistry {
 public:
  // Registry holding exact-qubo, exact-bisection, sa, sa-mbp,
  // hybrid-standin, kl and multilevel.
  static SolverRegistry with_builtin_backends();

  void register_backend(const std::string& id, std::shared_ptr<const SolverBackend> backend);
  bool contains(const std::string& id) const { return backends_.count(id) != 0; }
  const SolverBackend& backend(const std::string& id) const;
  std::vector<std::string> ids() const;

  // Checks capabilities, builds the QUBO when needed, times the call and
  // attaches graph metrics. Throws CapabilityError or InvalidArgument.
  SolveResult solve_with(const std::string& id, const SolveRequest& request) const;

 private:
  std::map<std::string, std::shared_ptr<const SolverBackend>> backends_;
};

}  // namespace mbp
