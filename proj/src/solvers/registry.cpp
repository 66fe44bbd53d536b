#include <chrono>
#include <string>
#include <utility>

#include "mbp/error.hpp"
#include "mbp/solvers.hpp"

namespace mbp {

void attach_graph_metrics(SolveResult& result, const Graph& g) {
  if (result.assignment.size() != g.node_count()) {
    throw InvalidArgument("assignment length does not match the graph");
  }
  result.inter_edges = e_cut(g, result.assignment);
  result.balance_deviation = balance_deviation(result.assignment);
  result.balanced = result.balance_deviation == 0;
}

namespace {

std::shared_ptr<const SolverBackend> backend_of(SolverCapabilities caps, FunctionBackend::Fn fn) {
  return std::make_shared<FunctionBackend>(caps, std::move(fn));
}

const QuboMatrix& qubo_for(const SolveRequest& request, QuboMatrix& storage) {
  if (request.qubo) return *request.qubo;
  storage = build_mbp_qubo(request.graph, *request.lambda);
  return storage;
}

}  // namespace

SolverRegistry SolverRegistry::with_builtin_backends() {
  SolverRegistry registry;
  const SolverCapabilities exact_qubo_caps{
      .max_nodes = kExactQuboMaxNodes, .requires_qubo = true, .requires_lambda = true, .deterministic = true};
  registry.register_backend("exact-qubo", backend_of(exact_qubo_caps, [](const SolveRequest& r) {
                              QuboMatrix storage;
                              return solve_exact_qubo(qubo_for(r, storage));
                            }));
  registry.register_backend("exact-bisection", backend_of({.max_nodes = kExactBisectionMaxNodes, .deterministic = true},
                                                          [](const SolveRequest& r) {
                                                            return solve_exact_bisection(r.graph);
                                                          }));
  registry.register_backend("sa", backend_of({.requires_qubo = true, .requires_lambda = true}, [](const SolveRequest& r) {
                              QuboMatrix storage;
                              return solve_sa(qubo_for(r, storage), r.sa, r.seed);
                            }));
  registry.register_backend("sa-mbp", backend_of({.requires_lambda = true}, [](const SolveRequest& r) {
                              return solve_sa_mbp(r.graph, *r.lambda, r.sa, r.seed);
                            }));
  registry.register_backend("hybrid-standin", backend_of({.requires_lambda = true}, [](const SolveRequest& r) {
                              SolveResult result = solve_sa_mbp(r.graph, *r.lambda, SaParams{}, r.seed);
                              result.solver_id = "hybrid-standin";
                              return result;
                            }));
  registry.register_backend("kl", backend_of({}, [](const SolveRequest& r) {
                              return solve_kl(r.graph, r.seed);
                            }));
  registry.register_backend("multilevel", backend_of({}, [](const SolveRequest& r) {
                              return solve_multilevel(r.graph, r.seed);
                            }));
  return registry;
}

void SolverRegistry::register_backend(const std::string& id, std::shared_ptr<const SolverBackend> backend) {
  if (id.empty()) throw InvalidArgument("solver id must not be empty");
  if (!backend) throw InvalidArgument("solver backend must not be null");
  if (!backends_.emplace(id, std::move(backend)).second) {
    throw InvalidArgument("solver id already registered: " + id);
  }
}

const SolverBackend& SolverRegistry::backend(const std::string& id) const {
  const auto it = backends_.find(id);
  if (it == backends_.end()) throw InvalidArgument("unknown solver id: " + id);
  return *it->second;
}

std::vector<std::string> SolverRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(backends_.size());
  for (const auto& [id, backend] : backends_) out.push_back(id);
  return out;
}

SolveResult SolverRegistry::solve_with(const std::string& id, const SolveRequest& request) const {
  const SolverBackend& chosen = backend(id);
  const SolverCapabilities caps = chosen.capabilities();
  const NodeId n = request.graph.node_count();
  if (n > caps.max_nodes) {
    throw CapabilityError(id + " handles at most " + std::to_string(caps.max_nodes) + " nodes, got " +
                          std::to_string(n));
  }
  if (request.qubo && request.qubo->order() != n) {
    throw InvalidArgument("QUBO order does not match the graph");
  }
  if (caps.requires_lambda && !request.lambda && !(caps.requires_qubo && request.qubo)) {
    throw InvalidArgument(id + " needs a penalty lambda");
  }
  if (request.lambda && !(*request.lambda > 0.0)) throw InvalidArgument("lambda must be positive");

  const auto start = std::chrono::steady_clock::now();
  SolveResult result = chosen.solve(request);
  result.wall_time = std::chrono::steady_clock::now() - start;
  if (result.solver_id.empty()) result.solver_id = id;
  attach_graph_metrics(result, request.graph);
  if (request.lambda) {
    result.energy = e_mbp(request.graph, *request.lambda, result.assignment);
  } else if (!caps.requires_qubo) {
    result.energy = static_cast<double>(*result.inter_edges);
  }
  if (!caps.deterministic && !result.seed) result.seed = request.seed;
  return result;
}

}  // namespace mbp
