#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mbp/error.hpp"
#include "mbp/solvers.hpp"

namespace mbp {

namespace {

PartitionAssignment decode(std::uint64_t code, Eigen::Index n) {
  PartitionAssignment x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = (code >> i) & 1U;
  return x;
}

}  // namespace

// Gray-code walk: each step flips one bit and updates the local fields
// f_i = sum_{j != i} Q_sym(i, j) x_j, so a step costs O(n).
SolveResult solve_exact_qubo(const QuboMatrix& q) {
  const Eigen::Index n = q.order();
  if (n > kExactQuboMaxNodes) {
    throw CapabilityError("exact-qubo handles at most " + std::to_string(kExactQuboMaxNodes) +
                          " variables, got " + std::to_string(n));
  }
  const auto start = std::chrono::steady_clock::now();
  const Eigen::MatrixXd sym = q.coeffs.to_symmetric_dense();
  Eigen::VectorXd field = Eigen::VectorXd::Zero(n);
  std::uint64_t code = 0;
  double current = 0.0;
  double best = 0.0;
  std::uint64_t best_code = 0;

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const int bit = std::countr_zero(step);
    const double dir = (code >> bit) & 1U ? -1.0 : 1.0;
    current += dir * (sym(bit, bit) + field[bit]);
    field.noalias() += dir * sym.col(bit);
    field[bit] -= dir * sym(bit, bit);
    code ^= std::uint64_t{1} << bit;

    const double tol = 1e-9 * std::max(1.0, std::abs(best));
    if (current < best - tol || (current <= best + tol && code < best_code)) {
      best = current;
      best_code = code;
    }
  }

  SolveResult result;
  result.solver_id = "exact-qubo";
  result.assignment = decode(best_code, n);
  result.energy = energy(q, result.assignment) + q.offset;
  result.balance_deviation = balance_deviation(result.assignment);
  result.balanced = result.balance_deviation == 0;
  result.iterations = static_cast<std::int64_t>(total);
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

// Enumerates (n/2 - 1)-subsets of nodes 1..n-1 in increasing bitmask order
// (Gosper's hack); node 0 is always in S1, which removes the complement
// duplicate of every bisection.
SolveResult solve_exact_bisection(const Graph& g) {
  require_even_order(g);
  const NodeId n = g.node_count();
  if (n > kExactBisectionMaxNodes) {
    throw CapabilityError("exact-bisection handles at most " + std::to_string(kExactBisectionMaxNodes) +
                          " nodes, got " + std::to_string(n));
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::uint32_t> adjacency(static_cast<std::size_t>(n), 0);
  for (const auto& [a, b] : g.edges()) {
    adjacency[a] |= 1U << b;
    adjacency[b] |= 1U << a;
  }
  const std::uint32_t all = n == 32 ? ~0U : (1U << n) - 1U;
  const int rest = n / 2 - 1;
  const int free_bits = n - 1;

  std::int64_t best_cut = -1;
  std::uint32_t best_set = 0;
  std::int64_t visited = 0;
  auto consider = [&](std::uint32_t mask) {
    const std::uint32_t set = 1U | (mask << 1);
    std::int64_t cut = 0;
    for (std::uint32_t rem = set; rem != 0; rem &= rem - 1) {
      cut += std::popcount(adjacency[std::countr_zero(rem)] & ~set & all);
    }
    ++visited;
    if (best_cut < 0 || cut < best_cut) {
      best_cut = cut;
      best_set = set;
    }
  };

  if (rest == 0) {
    consider(0);
  } else {
    const std::uint32_t limit = 1U << free_bits;
    for (std::uint32_t mask = (1U << rest) - 1U; mask < limit;) {
      consider(mask);
      const std::uint32_t low = mask & (0U - mask);
      const std::uint32_t ripple = mask + low;
      mask = (((ripple ^ mask) >> 2) / low) | ripple;
    }
  }

  SolveResult result;
  result.solver_id = "exact-bisection";
  result.assignment = decode(best_set, n);
  result.inter_edges = best_cut;
  result.energy = static_cast<double>(best_cut);
  result.balance_deviation = 0;
  result.balanced = true;
  result.iterations = visited;
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace mbp
