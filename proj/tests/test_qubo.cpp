#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "mbp/error.hpp"
#include "mbp/qubo.hpp"
#include "support.hpp"

using namespace mbp;
using testing::to_assignment;

namespace {

PartitionAssignment bits(std::initializer_list<int> v) { return to_assignment(std::vector<int>(v)); }

// E(x) = sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j, term by term.
double energy_by_definition(const QuboMatrix& q, const PartitionAssignment& x) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < q.order(); ++i) {
    e += q.coeffs(i, i) * x[i];
    for (Eigen::Index j = i + 1; j < q.order(); ++j) e += q.coeffs(i, j) * x[i] * x[j];
  }
  return e;
}

}  // namespace

TEST_CASE("build_mbp_qubo on a single edge") {
  const QuboMatrix q = build_mbp_qubo(Graph(2, {{0, 1}}), 1.0);
  CHECK(q.coeffs(0, 0) == 0.0);
  CHECK(q.coeffs(1, 1) == 0.0);
  CHECK(q.coeffs(0, 1) == 0.0);
  CHECK(q.offset == 1.0);
}

TEST_CASE("build_mbp_qubo on the 4-path") {
  const QuboMatrix q = build_mbp_qubo(path_graph(4), 1.0);
  CHECK(q.coeffs(0, 0) == -2.0);
  CHECK(q.coeffs(1, 1) == -1.0);
  CHECK(q.coeffs(2, 2) == -1.0);
  CHECK(q.coeffs(3, 3) == -2.0);
  CHECK(q.coeffs(0, 1) == 0.0);
  CHECK(q.coeffs(1, 2) == 0.0);
  CHECK(q.coeffs(2, 3) == 0.0);
  CHECK(q.coeffs(0, 2) == 2.0);
  CHECK(q.coeffs(0, 3) == 2.0);
  CHECK(q.coeffs(1, 3) == 2.0);
  CHECK(q.offset == 4.0);
}

TEST_CASE("build_mbp_qubo on an empty graph") {
  const QuboMatrix q = build_mbp_qubo(empty_graph(4), 2.0);
  for (Eigen::Index j = 0; j < 4; ++j) {
    CHECK(q.coeffs(j, j) == -6.0);
    for (Eigen::Index i = 0; i < j; ++i) CHECK(q.coeffs(i, j) == 4.0);
  }
  CHECK(q.offset == 8.0);
}

TEST_CASE("build_mbp_qubo argument checks") {
  CHECK_THROWS_AS(build_mbp_qubo(path_graph(3), 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_mbp_qubo(path_graph(4), 0.0), InvalidArgument);
  CHECK_THROWS_AS(build_mbp_qubo(path_graph(4), -1.0), InvalidArgument);
}

TEST_CASE("lower-triangle references are rejected") {
  QuboMatrix q = build_mbp_qubo(path_graph(4), 1.0);
  CHECK_THROWS_AS((void)q.coeffs(2, 1), InvalidArgument);
  CHECK_THROWS_AS(q.coeffs.coeffRef(3, 0), InvalidArgument);
  CHECK_THROWS_AS((void)q.coeffs(0, 4), InvalidArgument);
  CHECK(q.order() == 4);
  CHECK(q.coeffs.packed().size() == 10);
}

TEST_CASE("energy examples") {
  const QuboMatrix path = build_mbp_qubo(path_graph(4), 1.0);
  CHECK(energy(path, bits({0, 0, 0, 0})) == 0.0);
  CHECK(energy(path, bits({1, 1, 0, 0})) == -3.0);
  const QuboMatrix edge = build_mbp_qubo(Graph(2, {{0, 1}}), 1.0);
  CHECK(energy(edge, bits({1, 0})) == 0.0);
  CHECK_THROWS_AS(energy(path, bits({1, 0})), InvalidArgument);
}

TEST_CASE("e_cut examples") {
  CHECK(e_cut(complete_graph(4), bits({1, 1, 0, 0})) == 4);
  CHECK(e_cut(path_graph(4), bits({1, 0, 1, 0})) == 3);
  CHECK(e_cut(complete_graph(6), bits({1, 1, 1, 1, 1, 1})) == 0);
  CHECK(e_cut(complete_graph(6), bits({0, 0, 0, 0, 0, 0})) == 0);
  CHECK_THROWS_AS(e_cut(path_graph(4), bits({1, 0, 1})), InvalidArgument);
}

TEST_CASE("e_balance examples") {
  CHECK(e_balance(4, 3.0, bits({1, 1, 0, 0})) == 0.0);
  CHECK(e_balance(4, 3.0, bits({1, 1, 1, 0})) == 3.0);
  CHECK(e_balance(4, 3.0, bits({1, 1, 1, 1})) == 12.0);
}

TEST_CASE("e_mbp examples") {
  CHECK(e_mbp(path_graph(4), 1.0, bits({1, 1, 0, 0})) == 1.0);
  CHECK(e_mbp(path_graph(4), 1.0, bits({1, 0, 1, 0})) == 3.0);
  for (double lambda : {0.5, 1.0, 7.25}) {
    const Graph g = generate_er(10, 0.5, 3);
    CHECK(e_mbp(g, lambda, PartitionAssignment::Ones(10)) == doctest::Approx(lambda * 100.0 / 4.0));
  }
}

TEST_CASE("energy matches the term-by-term sum") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = generate_er(12, 0.4, static_cast<std::uint64_t>(trial));
    const QuboMatrix q = build_mbp_qubo(g, 0.3 + trial * 0.1);
    const PartitionAssignment x = testing::random_assignment(12, rng);
    CHECK(energy(q, x) == doctest::Approx(energy_by_definition(q, x)).epsilon(1e-12));
  }
}

TEST_CASE("offset identity against an independent E_MBP") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lambda_dist(0.01, 50.0);
  for (int trial = 0; trial < 300; ++trial) {
    const NodeId n = 2 * static_cast<NodeId>(1 + rng() % 20);
    const Graph g = generate_er(n, static_cast<double>(rng() % 101) / 100.0, rng());
    const double lambda = lambda_dist(rng);
    const PartitionAssignment x = testing::random_assignment(n, rng);
    const QuboMatrix q = build_mbp_qubo(g, lambda);
    const double reference = testing::mbp_energy(g, lambda, testing::to_vector(x));
    CHECK(std::abs(energy(q, x) + q.offset - reference) <= 1e-9 * std::max(1.0, std::abs(reference)));
    CHECK(e_mbp(g, lambda, x) == doctest::Approx(reference).epsilon(1e-12));
    CHECK(e_cut(g, x) == testing::count_cut(g, testing::to_vector(x)));
  }
}

TEST_CASE("complement symmetry and penalty-free balanced assignments") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = generate_er(14, 0.35, static_cast<std::uint64_t>(trial));
    const PartitionAssignment x = testing::random_assignment(14, rng);
    CHECK(e_mbp(g, 2.5, x) == e_mbp(g, 2.5, complement(x)));
    const std::int64_t cut = e_cut(g, x);
    CHECK(cut >= 0);
    CHECK(cut <= g.edge_count());
    if (ones_count(x) == 7) {
      CHECK(e_balance(14, 2.5, x) == 0.0);
      CHECK(e_mbp(g, 2.5, x) == static_cast<double>(cut));
    }
  }
}

TEST_CASE("to_ising examples") {
  const QuboMatrix zero{UpperTriangular<double>(3), 0.0};
  const IsingProblem z = to_ising(zero);
  CHECK(z.h.isZero());
  CHECK(z.couplings.packed().isZero());
  CHECK(z.constant == 0.0);

  QuboMatrix single{UpperTriangular<double>(1), 0.0};
  single.coeffs.coeffRef(0, 0) = 3.0;
  const IsingProblem s = to_ising(single);
  CHECK(s.h[0] == 1.5);
  CHECK(s.constant == 1.5);
}

TEST_CASE("Ising identity on a random 6x6 matrix") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  QuboMatrix q{UpperTriangular<double>(6), 0.0};
  for (Eigen::Index j = 0; j < 6; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) q.coeffs.coeffRef(i, j) = coef(rng);
  const IsingProblem ising = to_ising(q);
  for (std::uint64_t code = 0; code < 64; ++code) {
    const auto x = to_assignment(testing::bits_of(code, 6));
    const Eigen::VectorXd s = x.cast<double>() * 2.0 - Eigen::VectorXd::Ones(6);
    CHECK(std::abs(ising_energy(ising, s) + ising.constant - energy_by_definition(q, x)) <= 1e-12);
  }
}

TEST_CASE("Ising identity exhaustive on bisection QUBOs up to n = 10") {
  for (NodeId n = 2; n <= 10; n += 2) {
    const Graph g = generate_er(n, 0.5, static_cast<std::uint64_t>(n));
    const QuboMatrix q = build_mbp_qubo(g, 1.75);
    const IsingProblem ising = to_ising(q);
    double worst = 0.0;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
      const auto x = to_assignment(testing::bits_of(code, n));
      const Eigen::VectorXd s = x.cast<double>() * 2.0 - Eigen::VectorXd::Ones(n);
      worst = std::max(worst, std::abs(ising_energy(ising, s) + ising.constant - energy(q, x)));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("single-precision instantiation") {
  const BasicQuboMatrix<float> q = build_mbp_qubo(path_graph(4), 1.0f);
  CHECK(q.coeffs(0, 3) == 2.0f);
  CHECK(energy(q, bits({1, 1, 0, 0})) + q.offset == 1.0f);
}

TEST_CASE("qubo dump round trip") {
  const QuboMatrix q = build_mbp_qubo(generate_er(12, 0.3, 9), 0.1 * 3.0);
  std::stringstream buffer;
  write_qubo(buffer, q);
  const QuboMatrix back = read_qubo(buffer);
  CHECK(back.coeffs == q.coeffs);
  CHECK(back.offset == q.offset);

  std::istringstream bad("qubo 2 1\n1 0 3\noffset 0\n");
  CHECK_THROWS_AS(read_qubo(bad), ParseError);
}

TEST_CASE("bitstring helpers") {
  const PartitionAssignment x = bits({1, 0, 0, 1, 1});
  CHECK(to_bitstring(x) == "10011");
  CHECK(from_bitstring("10011") == x);
  CHECK_THROWS_AS(from_bitstring("10a"), InvalidArgument);
  CHECK(balance_deviation(bits({1, 1, 0, 0})) == 0);
  CHECK(balance_deviation(bits({1, 1, 1, 1})) == 2);
  CHECK(balance_deviation(bits({1, 1, 1, 0})) == 1);
}
