#pragma once

// Incremental energy models driven by the annealer. Both expose
// reset(x), delta(i), flip(i), exact_energy(x) and state().

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mbp/graph.hpp"
#include "mbp/qubo.hpp"

namespace mbp::detail {

// dE from the dense matrix. Keeps f_i = sum_{j != i} Q_sym(i, j) x_j so a
// proposal is O(1) and an accepted flip O(n).
class DenseQuboModel {
 public:
  explicit DenseQuboModel(const QuboMatrix& q) : q_(q), n_(q.order()) {}

  Eigen::Index size() const noexcept { return n_; }

  void reset(const PartitionAssignment& x) {
    x_ = x;
    field_ = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (!x_[j]) continue;
      for (Eigen::Index i = 0; i < n_; ++i)
        if (i != j) field_[i] += q_.coeffs.symmetric(i, j);
    }
  }

  double delta(Eigen::Index i) const noexcept {
    const double dir = x_[i] ? -1.0 : 1.0;
    return dir * (q_.coeffs.symmetric(i, i) + field_[i]);
  }

  void flip(Eigen::Index k) noexcept {
    const double dir = x_[k] ? -1.0 : 1.0;
    const auto& packed = q_.coeffs.packed();
    const Eigen::Index column = UpperTriangular<double>::packed_index(0, k);
    for (Eigen::Index i = 0; i < k; ++i) field_[i] += dir * packed[column + i];
    for (Eigen::Index i = k + 1; i < n_; ++i)
      field_[i] += dir * packed[UpperTriangular<double>::packed_index(k, i)];
    x_[k] ^= 1U;
  }

  double exact_energy(const PartitionAssignment& x) const { return energy(q_, x) + q_.offset; }
  const PartitionAssignment& state() const noexcept { return x_; }

 private:
  const QuboMatrix& q_;
  Eigen::Index n_;
  PartitionAssignment x_;
  Eigen::VectorXd field_;
};

// dE of E_MBP without the matrix: cut change from the count of neighbours
// in S1, penalty change from the running size of S1. O(1) per proposal,
// O(deg) per accepted flip.
class ImplicitMbpModel {
 public:
  ImplicitMbpModel(const Graph& g, double lambda) : g_(g), lambda_(lambda), n_(g.node_count()) {}

  Eigen::Index size() const noexcept { return n_; }

  void reset(const PartitionAssignment& x) {
    x_ = x;
    ones_ = ones_count(x);
    neighbours_in_s1_.assign(static_cast<std::size_t>(n_), 0);
    for (const auto& [a, b] : g_.edges()) {
      if (x_[b]) ++neighbours_in_s1_[a];
      if (x_[a]) ++neighbours_in_s1_[b];
    }
  }

  double delta(Eigen::Index i) const noexcept {
    const std::int64_t dir = x_[i] ? -1 : 1;
    const std::int64_t cut = dir * (g_.degree(static_cast<NodeId>(i)) - 2 * neighbours_in_s1_[i]);
    const std::int64_t surplus = ones_ - n_ / 2;
    return static_cast<double>(cut) + lambda_ * static_cast<double>(2 * dir * surplus + 1);
  }

  void flip(Eigen::Index k) noexcept {
    const int dir = x_[k] ? -1 : 1;
    for (NodeId v : g_.neighbors(static_cast<NodeId>(k))) neighbours_in_s1_[v] += dir;
    ones_ += dir;
    x_[k] ^= 1U;
  }

  double exact_energy(const PartitionAssignment& x) const { return e_mbp(g_, lambda_, x); }
  const PartitionAssignment& state() const noexcept { return x_; }

 private:
  const Graph& g_;
  double lambda_;
  std::int64_t n_;
  PartitionAssignment x_;
  std::int64_t ones_ = 0;
  std::vector<std::int64_t> neighbours_in_s1_;
};

}  // namespace mbp::detail
