#include <cmath>

#include "mbp/harness.hpp"

namespace mbp {

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

AuditReport audit_records(std::span<const ExperimentRecord> records, const SolverRegistry* registry) {
  AuditReport report;
  for (const auto& r : records) {
    ++report.checked;
    auto fail = [&](const std::string& what) { report.failures.push_back(r.record_id + ": " + what); };

    if (!r.graph.p || !r.graph.seed) {
      fail("graph has no generation parameters and cannot be regenerated");
      continue;
    }
    const Graph g = generate_er(static_cast<NodeId>(r.graph.n), *r.graph.p, *r.graph.seed);
    if (describe(g) != r.graph) fail("stored graph fields differ from the regenerated graph");
    if (graph_key(g) != r.graph_key) fail("graph key differs from the regenerated graph");

    PartitionAssignment x;
    try {
      x = from_bitstring(r.assignment);
    } catch (const std::exception& e) {
      fail(std::string("assignment unreadable: ") + e.what());
      continue;
    }
    if (x.size() != g.node_count()) {
      fail("assignment length differs from n");
      continue;
    }
    if (e_cut(g, x) != r.inter_edges) fail("inter_edges differs from the recomputed cut");
    if (balance_deviation(x) != r.balance_deviation) fail("balance_deviation differs from the assignment");
    if (r.balanced != (r.balance_deviation == 0)) fail("balanced flag inconsistent with balance_deviation");

    if (!r.lambda_spec) {
      if (r.energy != static_cast<double>(r.inter_edges)) fail("energy differs from the cut");
      continue;
    }
    const LambdaSpec& spec = *r.lambda_spec;
    if (!close(r.energy, e_mbp(g, spec.lambda, x))) fail("energy differs from the recomputed E_MBP");
    if (spec.strategy == LambdaStrategyKind::Est || spec.strategy == LambdaStrategyKind::EstTimesMult) {
      const LambdaSpec again =
          resolve_lambda(g, spec.strategy == LambdaStrategyKind::Est ? LambdaStrategy{EstStrategy{}}
                                                                     : LambdaStrategy{MultStrategy{*spec.multiplier}});
      if (again != spec) fail("lambda provenance differs from recomputation");
    }

    if (registry && r.solver_seed && registry->contains(r.solver_id)) {
      const SolveRequest request{g, nullptr, spec.lambda, *r.solver_seed, r.sa.value_or(SaParams{})};
      const SolveResult replay = registry->solve_with(r.solver_id, request);
      ++report.replayed;
      if (to_bitstring(replay.assignment) != r.assignment) fail("replay with the stored seed gives another assignment");
    }
  }
  return report;
}

}  // namespace mbp
