#include <algorithm>
#include <bit>
#include <ctime>
#include <future>
#include <set>
#include <variant>

#include "mbp/detail/format.hpp"
#include "mbp/error.hpp"
#include "mbp/harness.hpp"
#include "mbp/rng.hpp"

namespace mbp {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

bool records_sa_params(const std::string& solver_id) {
  return solver_id == "sa" || solver_id == "sa-mbp" || solver_id == "hybrid-standin";
}

struct InstanceContext {
  const Graph& graph;
  GraphInfo info;
  std::string key;
};

ExperimentRecord make_record(const InstanceContext& ctx, const std::optional<LambdaSpec>& spec,
                             const std::string& label, const SolveResult& result, const SaParams& sa,
                             std::chrono::nanoseconds qubo_build) {
  ExperimentRecord r;
  r.graph_key = ctx.key;
  r.graph = ctx.info;
  r.lambda_spec = spec;
  r.strategy = label;
  r.solver_id = result.solver_id;
  r.record_id = ctx.key + "/" + label + "/" + r.solver_id;
  r.inter_edges = *result.inter_edges;
  r.balanced = result.balanced;
  r.balance_deviation = result.balance_deviation;
  r.energy = result.energy;
  r.assignment = to_bitstring(result.assignment);
  r.solver_seed = result.seed;
  r.iterations = result.iterations;
  if (records_sa_params(r.solver_id)) r.sa = r.solver_id == "hybrid-standin" ? SaParams{} : sa;
  r.pre_repair_cut = result.pre_repair_cut;
  r.pre_repair_balanced = result.pre_repair_balanced;
  r.wall_time_qubo_build = qubo_build;
  r.wall_time_solve = result.wall_time;
  r.created_at = utc_now();
  return r;
}

ExperimentRecord trivial_record(const InstanceContext& ctx, const std::string& label) {
  SolveResult result;
  result.solver_id = "trivial";
  const NodeId n = ctx.graph.node_count();
  result.assignment = PartitionAssignment::Zero(n);
  result.assignment.head(n / 2).setOnes();
  attach_graph_metrics(result, ctx.graph);
  result.energy = 0.0;
  return make_record(ctx, std::nullopt, label, result, SaParams{}, std::chrono::nanoseconds{0});
}

// Runs the lambda-consuming solvers for one resolved lambda; the QUBO is
// built at most once and only when some solver consumes it.
std::vector<ExperimentRecord> solve_with_lambda(const InstanceContext& ctx, const LambdaSpec& spec,
                                                const std::string& label, std::span<const std::string> ids,
                                                const RunOptions& options, const SolverRegistry& registry) {
  const bool needs_qubo = std::any_of(ids.begin(), ids.end(), [&](const std::string& id) {
    return registry.backend(id).capabilities().requires_qubo;
  });
  QuboMatrix q;
  std::chrono::nanoseconds build_time{0};
  if (needs_qubo) {
    const auto start = std::chrono::steady_clock::now();
    q = build_mbp_qubo(ctx.graph, spec.lambda);
    build_time = std::chrono::steady_clock::now() - start;
  }
  std::vector<ExperimentRecord> out;
  for (const auto& id : ids) {
    const SolveRequest request{ctx.graph, needs_qubo ? &q : nullptr, spec.lambda, options.seed, options.sa};
    const SolveResult result = registry.solve_with(id, request);
    const bool uses_q = registry.backend(id).capabilities().requires_qubo;
    out.push_back(make_record(ctx, spec, label, result, options.sa, uses_q ? build_time : std::chrono::nanoseconds{0}));
  }
  return out;
}

void check_ids(std::span<const std::string> ids, const SolverRegistry& registry) {
  for (const auto& id : ids) (void)registry.backend(id);
}

}  // namespace

GraphInfo describe(const Graph& g) {
  GraphInfo info;
  info.n = g.node_count();
  if (g.meta()) {
    info.p = g.meta()->edge_probability;
    info.seed = g.meta()->seed;
  }
  info.density = g.node_count() >= 2 ? density(g) : 0.0;
  info.max_degree = max_degree(g);
  info.edge_count = g.edge_count();
  return info;
}

std::string graph_key(const Graph& g) {
  std::string key = "n" + std::to_string(g.node_count());
  if (g.meta()) {
    return key + "-p" + detail::format_double(g.meta()->edge_probability) + "-s" + std::to_string(g.meta()->seed);
  }
  std::uint64_t hash = fnv1a("");
  for (const auto& [a, b] : g.edges()) hash = fnv1a(std::to_string(a) + "," + std::to_string(b) + ";", hash);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i, hash >>= 4) hex[static_cast<std::size_t>(i)] = kHex[hash & 0xF];
  return key + "-h" + hex;
}

std::string strategy_label(const LambdaStrategy& strategy) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, MaxcutStrategy>) return "maxcut";
        else if constexpr (std::is_same_v<S, EstStrategy>) return "est";
        else if constexpr (std::is_same_v<S, MultStrategy>) return "mult:" + detail::format_double(s.multiplier);
        else if constexpr (std::is_same_v<S, GbrStrategy>) return "gbr";
        else return "fixed:" + detail::format_double(s.value);
      },
      strategy);
}

std::vector<ExperimentRecord> run_instance(const Graph& g, const LambdaStrategy& strategy,
                                           std::span<const std::string> solver_ids, const RunOptions& options,
                                           const SolverRegistry& registry) {
  require_even_order(g);
  check_ids(solver_ids, registry);
  const InstanceContext ctx{g, describe(g), graph_key(g)};
  const std::string label = strategy_label(strategy);
  if (g.edge_count() == 0) return {trivial_record(ctx, label)};
  const LambdaSpec spec = resolve_lambda(g, strategy);
  return solve_with_lambda(ctx, spec, label, solver_ids, options, registry);
}

std::vector<SweepCell> sweep_cells(const SweepConfig& config) {
  std::vector<SweepCell> cells;
  for (NodeId n : config.nodes) {
    for (double p : config.probs) {
      for (int r = 0; r < config.seeds_per_cell; ++r) {
        SweepCell cell{n, p, r, 0, 0};
        cell.graph_seed = derive_seed(derive_seed(derive_seed(config.master_seed, static_cast<std::uint64_t>(n)),
                                                  std::bit_cast<std::uint64_t>(p)),
                                      static_cast<std::uint64_t>(r));
        cell.solver_seed = derive_seed(cell.graph_seed, fnv1a("solve"));
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

namespace {

struct CellOutcome {
  std::vector<ExperimentRecord> records;
  std::size_t skipped = 0;
  std::optional<std::string> failure;
};

CellOutcome run_cell(const SweepCell& cell, const SweepConfig& config, const std::set<std::string>& existing,
                     const SolverRegistry& registry) {
  CellOutcome outcome;
  const Graph g = generate_er(cell.n, cell.p, cell.graph_seed);
  const InstanceContext ctx{g, describe(g), graph_key(g)};
  try {
    require_even_order(g);
    if (g.edge_count() == 0) {
      ExperimentRecord trivial = trivial_record(ctx, "none");
      if (existing.count(trivial.record_id)) ++outcome.skipped;
      else outcome.records.push_back(std::move(trivial));
      return outcome;
    }

    std::vector<LambdaStrategy> strategies;
    if (config.strategy) {
      strategies.push_back(*config.strategy);
    } else {
      const std::vector<double> mults =
          config.multipliers.empty() ? lambda_mult_candidates(cell.n) : config.multipliers;
      for (double m : mults) strategies.emplace_back(MultStrategy{m});
    }

    const RunOptions options{cell.solver_seed, config.sa};
    std::map<std::string, SolveResult> native_results;
    for (const auto& strategy : strategies) {
      const std::string label = strategy_label(strategy);
      std::vector<std::string> lambda_ids;
      std::vector<std::string> native_ids;
      for (const auto& id : config.solvers) {
        if (existing.count(ctx.key + "/" + label + "/" + id)) {
          ++outcome.skipped;
          continue;
        }
        (registry.backend(id).capabilities().requires_lambda ? lambda_ids : native_ids).push_back(id);
      }
      if (lambda_ids.empty() && native_ids.empty()) continue;

      const LambdaSpec spec = resolve_lambda(g, strategy);
      for (auto& record : solve_with_lambda(ctx, spec, label, lambda_ids, options, registry)) {
        outcome.records.push_back(std::move(record));
      }
      for (const auto& id : native_ids) {
        auto it = native_results.find(id);
        if (it == native_results.end()) {
          const SolveRequest request{g, nullptr, std::nullopt, cell.solver_seed, config.sa};
          it = native_results.emplace(id, registry.solve_with(id, request)).first;
        }
        SolveResult rescored = it->second;
        rescored.energy = e_mbp(g, spec.lambda, rescored.assignment);
        outcome.records.push_back(make_record(ctx, spec, label, rescored, config.sa, std::chrono::nanoseconds{0}));
      }
    }
  } catch (const std::exception& e) {
    outcome.records.clear();
    outcome.failure = ctx.key + ": " + e.what();
  }
  return outcome;
}

}  // namespace

SweepSummary sweep(const SweepConfig& config, RecordStore& store, const SolverRegistry& registry) {
  if (config.nodes.empty() || config.probs.empty() || config.seeds_per_cell < 1) {
    throw InvalidArgument("sweep: node list, probability list and seeds per cell must be non-empty");
  }
  if (config.solvers.empty()) throw InvalidArgument("sweep: no solvers given");
  if (config.jobs < 1) throw InvalidArgument("sweep: jobs must be >= 1");
  check_ids(config.solvers, registry);
  config.sa.validate();

  std::set<std::string> existing;
  for (const auto& record : scan_store(store.path()).records) existing.insert(record.record_id);

  const std::vector<SweepCell> cells = sweep_cells(config);
  SweepSummary summary;
  const auto jobs = static_cast<std::size_t>(config.jobs);
  for (std::size_t first = 0; first < cells.size(); first += jobs) {
    const std::size_t last = std::min(cells.size(), first + jobs);
    std::vector<std::future<CellOutcome>> batch;
    for (std::size_t k = first; k < last; ++k) {
      batch.push_back(std::async(std::launch::async, run_cell, std::cref(cells[k]), std::cref(config),
                                 std::cref(existing), std::cref(registry)));
    }
    for (auto& pending : batch) {
      CellOutcome outcome = pending.get();
      summary.skipped += outcome.skipped;
      if (outcome.failure) summary.failures.push_back(*outcome.failure);
      store.append(outcome.records);
      summary.appended += outcome.records.size();
    }
  }
  return summary;
}

}  // namespace mbp
