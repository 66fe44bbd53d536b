#pragma once

// Independent reference computations for the tests. They work from the
// edge list and the raw definitions only, never from the library's
// energy or solver code.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mbp/graph.hpp"
#include "mbp/qubo.hpp"

namespace mbp::testing {

inline std::int64_t count_cut(const Graph& g, const std::vector<int>& side) {
  std::int64_t cut = 0;
  for (const auto& [a, b] : g.edges()) cut += side[a] != side[b];
  return cut;
}

inline double mbp_energy(const Graph& g, double lambda, const std::vector<int>& side) {
  double ones = 0;
  for (int s : side) ones += s;
  const double dev = ones - g.node_count() / 2.0;
  return static_cast<double>(count_cut(g, side)) + lambda * dev * dev;
}

inline std::vector<int> bits_of(std::uint64_t code, int n) {
  std::vector<int> side(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) side[i] = static_cast<int>((code >> i) & 1U);
  return side;
}

inline std::vector<int> to_vector(const PartitionAssignment& x) {
  return std::vector<int>(x.data(), x.data() + x.size());
}

inline PartitionAssignment to_assignment(const std::vector<int>& side) {
  PartitionAssignment x(static_cast<Eigen::Index>(side.size()));
  for (std::size_t i = 0; i < side.size(); ++i) x[static_cast<Eigen::Index>(i)] = side[i] ? 1 : 0;
  return x;
}

struct BruteForce {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> minimizers;
};

// Every global minimizer of E_MBP over all 2^n assignments.
inline BruteForce brute_force_mbp(const Graph& g, double lambda) {
  BruteForce out;
  const int n = g.node_count();
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    const auto side = bits_of(code, n);
    const double e = mbp_energy(g, lambda, side);
    if (e < out.best - 1e-9) {
      out.best = e;
      out.minimizers.clear();
    }
    if (e <= out.best + 1e-9) out.minimizers.push_back(side);
  }
  return out;
}

// Minimum cut over all balanced assignments.
inline std::int64_t brute_force_bisection(const Graph& g) {
  const int n = g.node_count();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    const auto side = bits_of(code, n);
    int ones = 0;
    for (int s : side) ones += s;
    if (2 * ones != n) continue;
    best = std::min(best, count_cut(g, side));
  }
  return best;
}

inline PartitionAssignment random_assignment(Eigen::Index n, std::mt19937_64& rng) {
  PartitionAssignment x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>(rng() & 1U);
  return x;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("mbp-test-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace mbp::testing
