#pragma once

// QUBO / Ising formulation of minimum bisection.
//
// A QUBO over x in {0,1}^n is E(x) = sum_i Q[i,i] x_i + sum_{i<j} Q[i,j] x_i x_j.
// For bisection the balance term writes 2*lambda into every off-diagonal
// entry, so the matrix is dense by construction; it is stored as a packed
// upper triangle of n(n+1)/2 coefficients. Building it is Theta(n^2) time
// and memory; there is no streaming variant.

#include <cstdint>
#include <iosfwd>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Core>

#include "mbp/detail/format.hpp"
#include "mbp/error.hpp"
#include "mbp/graph.hpp"

namespace mbp {

// x_i = 1 puts node i in S1, x_i = 0 in S0.
using PartitionAssignment = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

inline std::int64_t ones_count(const PartitionAssignment& x) {
  return x.cast<std::int64_t>().sum();
}

inline PartitionAssignment complement(const PartitionAssignment& x) {
  return x.unaryExpr([](std::uint8_t b) -> std::uint8_t { return b ? 0 : 1; });
}

// |sum x - n/2| for even n; for odd n the deviation is measured against
// the nearest balanced count so it is never zero.
inline std::int64_t balance_deviation(const PartitionAssignment& x) {
  const std::int64_t twice = 2 * ones_count(x) - static_cast<std::int64_t>(x.size());
  return ((twice < 0 ? -twice : twice) + 1) / 2;
}

inline std::string to_bitstring(const PartitionAssignment& x) {
  std::string bits(static_cast<std::size_t>(x.size()), '0');
  for (Eigen::Index i = 0; i < x.size(); ++i) bits[static_cast<std::size_t>(i)] = x[i] ? '1' : '0';
  return bits;
}

inline PartitionAssignment from_bitstring(const std::string& bits) {
  PartitionAssignment x(static_cast<Eigen::Index>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw InvalidArgument("assignment: expected 0/1 string");
    x[static_cast<Eigen::Index>(i)] = bits[i] == '1' ? 1 : 0;
  }
  return x;
}

// Packed column-major upper triangle: entry (i, j), i <= j, lives at
// j(j+1)/2 + i. References below the diagonal are rejected.
template <typename Scalar>
class UpperTriangular {
 public:
  using Index = Eigen::Index;

  UpperTriangular() = default;
  explicit UpperTriangular(Index order)
      : order_(order), data_(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(packed_size(order))) {}

  static constexpr Index packed_size(Index order) { return order * (order + 1) / 2; }
  static constexpr Index packed_index(Index i, Index j) { return j * (j + 1) / 2 + i; }

  Index order() const noexcept { return order_; }

  Scalar operator()(Index i, Index j) const {
    check(i, j);
    return data_[packed_index(i, j)];
  }
  Scalar& coeffRef(Index i, Index j) {
    check(i, j);
    return data_[packed_index(i, j)];
  }

  // Unchecked symmetric read, for inner loops that already know i != j order.
  Scalar symmetric(Index i, Index j) const noexcept {
    return i <= j ? data_[packed_index(i, j)] : data_[packed_index(j, i)];
  }

  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& packed() const noexcept { return data_; }

  // Full symmetric matrix with the upper off-diagonal entries mirrored.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_symmetric_dense() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense(order_, order_);
    for (Index j = 0; j < order_; ++j)
      for (Index i = 0; i <= j; ++i) dense(i, j) = dense(j, i) = data_[packed_index(i, j)];
    return dense;
  }

  friend bool operator==(const UpperTriangular& a, const UpperTriangular& b) {
    return a.order_ == b.order_ && a.data_ == b.data_;
  }

 private:
  void check(Index i, Index j) const {
    if (i < 0 || j < 0 || i >= order_ || j >= order_) throw InvalidArgument("qubo: index out of range");
    if (i > j) throw InvalidArgument("qubo: only entries with i <= j are stored");
  }

  Index order_ = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> data_;
};

template <typename Scalar>
struct BasicQuboMatrix {
  UpperTriangular<Scalar> coeffs;
  Scalar offset = 0;  // constant dropped by the matrix form (lambda n^2 / 4)

  Eigen::Index order() const noexcept { return coeffs.order(); }
};

using QuboMatrix = BasicQuboMatrix<double>;

// H(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j over s in {-1,+1}^n, with
// H(s) + constant equal to the QUBO energy at x = (s + 1) / 2.
template <typename Scalar>
struct BasicIsingProblem {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h;
  UpperTriangular<Scalar> couplings;  // diagonal unused, always zero
  Scalar constant = 0;

  Eigen::Index order() const noexcept { return h.size(); }
};

using IsingProblem = BasicIsingProblem<double>;

template <typename Scalar = double>
BasicQuboMatrix<Scalar> build_mbp_qubo(const Graph& g, Scalar lambda) {
  require_even_order(g);
  if (!(lambda > 0)) throw InvalidArgument("build_mbp_qubo: lambda must be positive");
  const Eigen::Index n = g.node_count();
  BasicQuboMatrix<Scalar> q{UpperTriangular<Scalar>(n), Scalar(0)};

  for (const auto& [i, j] : g.edges()) {
    q.coeffs.coeffRef(i, i) += Scalar(1);
    q.coeffs.coeffRef(j, j) += Scalar(1);
    q.coeffs.coeffRef(i, j) -= Scalar(2);
  }
  const Scalar linear = lambda * Scalar(1 - n);
  const Scalar pair = Scalar(2) * lambda;
  for (Eigen::Index j = 0; j < n; ++j) {
    q.coeffs.coeffRef(j, j) += linear;
    for (Eigen::Index i = 0; i < j; ++i) q.coeffs.coeffRef(i, j) += pair;
  }
  q.offset = lambda * Scalar(n) * Scalar(n) / Scalar(4);
  return q;
}

// QUBO energy without the offset.
template <typename Scalar, typename Derived>
Scalar energy(const BasicQuboMatrix<Scalar>& q, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != q.order()) throw InvalidArgument("energy: assignment length mismatch");
  const auto& packed = q.coeffs.packed();
  Scalar total = 0;
  for (Eigen::Index j = 0; j < q.order(); ++j) {
    if (!x[j]) continue;
    const Eigen::Index column = UpperTriangular<Scalar>::packed_index(0, j);
    Scalar column_sum = packed[column + j];
    for (Eigen::Index i = 0; i < j; ++i)
      if (x[i]) column_sum += packed[column + i];
    total += column_sum;
  }
  return total;
}

// Number of edges with endpoints on different sides.
template <typename Derived>
std::int64_t e_cut(const Graph& g, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != g.node_count()) throw InvalidArgument("e_cut: assignment length mismatch");
  std::int64_t cut = 0;
  for (const auto& [i, j] : g.edges()) cut += (x[i] != 0) != (x[j] != 0);
  return cut;
}

template <typename Scalar, typename Derived>
Scalar e_balance(Eigen::Index n, Scalar lambda, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != n) throw InvalidArgument("e_balance: assignment length mismatch");
  const Scalar deviation = Scalar(x.template cast<std::int64_t>().sum()) - Scalar(n) / Scalar(2);
  return lambda * deviation * deviation;
}

template <typename Scalar, typename Derived>
Scalar e_mbp(const Graph& g, Scalar lambda, const Eigen::MatrixBase<Derived>& x) {
  return Scalar(e_cut(g, x)) + e_balance(g.node_count(), lambda, x);
}

template <typename Scalar>
BasicIsingProblem<Scalar> to_ising(const BasicQuboMatrix<Scalar>& q) {
  const Eigen::Index n = q.order();
  BasicIsingProblem<Scalar> ising{Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n),
                                  UpperTriangular<Scalar>(n), Scalar(0)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Scalar diag = q.coeffs(j, j);
    ising.h[j] += diag / Scalar(2);
    ising.constant += diag / Scalar(2);
    for (Eigen::Index i = 0; i < j; ++i) {
      const Scalar quarter = q.coeffs(i, j) / Scalar(4);
      ising.couplings.coeffRef(i, j) = quarter;
      ising.h[i] += quarter;
      ising.h[j] += quarter;
      ising.constant += quarter;
    }
  }
  return ising;
}

template <typename Scalar, typename Derived>
Scalar ising_energy(const BasicIsingProblem<Scalar>& ising, const Eigen::MatrixBase<Derived>& spins) {
  if (spins.size() != ising.order()) throw InvalidArgument("ising_energy: spin vector length mismatch");
  Scalar total = 0;
  for (Eigen::Index j = 0; j < ising.order(); ++j) {
    const Scalar sj = Scalar(spins[j]);
    total += ising.h[j] * sj;
    for (Eigen::Index i = 0; i < j; ++i) total += ising.couplings(i, j) * Scalar(spins[i]) * sj;
  }
  return total;
}

// Debug dump: `qubo <n> <nnz>`, then `<i> <j> <value>` for every nonzero
// entry with i <= j, then `offset <value>`.
template <typename Scalar>
void write_qubo(std::ostream& out, const BasicQuboMatrix<Scalar>& q) {
  const auto& packed = q.coeffs.packed();
  const Eigen::Index nnz = (packed.array() != Scalar(0)).count();
  out << "qubo " << q.order() << ' ' << nnz << '\n';
  for (Eigen::Index j = 0; j < q.order(); ++j)
    for (Eigen::Index i = 0; i <= j; ++i)
      if (const Scalar v = q.coeffs(i, j); v != Scalar(0))
        out << i << ' ' << j << ' ' << detail::format_double(static_cast<double>(v)) << '\n';
  out << "offset " << detail::format_double(static_cast<double>(q.offset)) << '\n';
}

inline QuboMatrix read_qubo(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next()) throw ParseError(line_no, "missing 'qubo' header");
  std::istringstream header(line);
  std::string tag;
  Eigen::Index n = -1, nnz = -1;
  if (!(header >> tag >> n >> nnz) || tag != "qubo" || n < 0 || nnz < 0)
    throw ParseError(line_no, "expected 'qubo <n> <nnz>'");
  QuboMatrix q{UpperTriangular<double>(n), 0.0};
  for (Eigen::Index k = 0; k < nnz; ++k) {
    if (!next()) throw ParseError(line_no, "truncated coefficient list");
    std::istringstream fields(line);
    Eigen::Index i = -1, j = -1;
    double value = 0;
    if (!(fields >> i >> j >> value)) throw ParseError(line_no, "expected '<i> <j> <value>'");
    if (i < 0 || j >= n || i > j) throw ParseError(line_no, "entry outside the upper triangle");
    q.coeffs.coeffRef(i, j) = value;
  }
  if (!next()) throw ParseError(line_no, "missing offset line");
  std::istringstream tail(line);
  if (!(tail >> tag >> q.offset) || tag != "offset") throw ParseError(line_no, "expected 'offset <value>'");
  return q;
}

}  // namespace mbp
