#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <random>

#include "mbp/error.hpp"
#include "mbp/penalty.hpp"
#include "mbp/qubo.hpp"
#include "support.hpp"

using namespace mbp;

namespace {

GbrModel constant_model(double value) {
  GbrModel m;
  m.init_value = value;
  m.feature_count = kLambdaFeatureCount;
  return m;
}

// n = 100, node 0 adjacent to 1..10: max degree 10.
Graph hub_graph() {
  std::vector<Graph::Edge> edges;
  for (NodeId v = 1; v <= 10; ++v) edges.emplace_back(0, v);
  return Graph(100, edges);
}

}  // namespace

TEST_CASE("lambda_maxcut") {
  CHECK(lambda_maxcut(100, 0.1) == doctest::Approx(250.0));
  CHECK(lambda_maxcut(4, 0.5) == 2.0);
  for (NodeId n : {2, 10, 37, 1000}) CHECK(lambda_maxcut(n, 1.0) == static_cast<double>(n) * n / 4.0);
  CHECK_THROWS_AS(lambda_maxcut(10, -0.01), InvalidArgument);
  CHECK_THROWS_AS(lambda_maxcut(10, 1.01), InvalidArgument);
  CHECK_THROWS_AS(lambda_maxcut(1, 0.5), InvalidArgument);
}

TEST_CASE("lambda_bounds") {
  CHECK(lambda_bounds(complete_graph(4)) == LambdaBounds{1.0, 1.0});
  CHECK(lambda_bounds(star_graph(100)) == LambdaBounds{1.0, 49.0});
  CHECK(lambda_bounds(path_graph(4)) == LambdaBounds{1.0, 1.0});
  CHECK_THROWS_AS(lambda_bounds(empty_graph(4)), StrategyError);
  CHECK_THROWS_AS(lambda_bounds(path_graph(5)), InvalidArgument);
  CHECK_THROWS_AS(lambda_bounds(Graph(2, {{0, 1}})), InvalidArgument);
}

TEST_CASE("lambda_est") {
  CHECK(lambda_est(hub_graph()) == 5.5);
  CHECK(lambda_est(complete_graph(4)) == 1.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Graph g = generate_er(1000, 0.75, seed);
    CHECK(max_degree(g) >= 499);
    CHECK(lambda_est(g) == 250.0);
  }
}

TEST_CASE("lambda_est is the midpoint of the bounds") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const NodeId n = static_cast<NodeId>(4 + 2 * (seed % 30));
    const Graph g = generate_er(n, 0.05 + 0.015 * static_cast<double>(seed), seed);
    if (g.edge_count() == 0) continue;
    const LambdaBounds b = lambda_bounds(g);
    const double est = lambda_est(g);
    CHECK(est >= b.lower);
    CHECK(est <= b.upper);
    CHECK(est == (b.lower + b.upper) / 2.0);
  }
}

TEST_CASE("multiplier table") {
  using V = std::vector<double>;
  CHECK(lambda_mult_candidates(100) == V{0.05, 0.1, 0.2, 0.4});
  CHECK(lambda_mult_candidates(200) == V{0.05, 0.1, 0.2, 0.4});
  CHECK(lambda_mult_candidates(700) == V{0.005, 0.01, 0.03, 0.05, 0.1});
  CHECK(lambda_mult_candidates(3000) == V{0.0005, 0.001, 0.002, 0.005, 0.01, 0.03, 0.05, 0.1});
  CHECK(lambda_mult_candidates(400) == V{0.005, 0.01, 0.03, 0.05, 0.1, 0.2});
  CHECK(lambda_mult_candidates(1200) == V{0.002, 0.005, 0.01, 0.03, 0.05, 0.1});
  CHECK(lambda_mult_candidates(1800) == V{0.002, 0.005, 0.01, 0.03, 0.05, 0.1});
  // Unlisted sizes: nearest tabulated size, ties toward the smaller one.
  CHECK(lambda_mult_candidates(2) == lambda_mult_candidates(100));
  CHECK(lambda_mult_candidates(250) == lambda_mult_candidates(200));
  CHECK(lambda_mult_candidates(950) == lambda_mult_candidates(900));
  CHECK(lambda_mult_candidates(2250) == lambda_mult_candidates(2000));
  CHECK(lambda_mult_candidates(2300) == lambda_mult_candidates(2500));
  CHECK(lambda_mult_candidates(9000) == lambda_mult_candidates(4000));
  CHECK_THROWS_AS(lambda_mult_candidates(1), InvalidArgument);
}

TEST_CASE("multiplier sets are non-empty and strictly increasing for every n") {
  for (NodeId n = 2; n <= 5000; n += 7) {
    const auto m = lambda_mult_candidates(n);
    REQUIRE_FALSE(m.empty());
    for (std::size_t k = 1; k < m.size(); ++k) CHECK(m[k - 1] < m[k]);
  }
}

TEST_CASE("lambda_final") {
  CHECK(lambda_final(5.5, 0.1) == doctest::Approx(0.55));
  CHECK(lambda_final(3.25, 1.0) == 3.25);
  CHECK(lambda_final(250.0, 0.002) == doctest::Approx(0.5));
  CHECK_THROWS_AS(lambda_final(0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(lambda_final(1.0, -0.1), InvalidArgument);
}

TEST_CASE("lambda_from_gbr") {
  const Graph g = hub_graph();
  const LambdaSpec same = lambda_from_gbr(constant_model(0.2), constant_model(0.2), g);
  CHECK(same.lambda == doctest::Approx(5.5 * 0.2));

  const LambdaSpec spec = lambda_from_gbr(constant_model(0.05), constant_model(0.1), g);
  CHECK(spec.strategy == LambdaStrategyKind::Gbr);
  CHECK(spec.lambda == doctest::Approx(0.4125));
  CHECK(*spec.lambda_est == 5.5);
  CHECK(spec.gbr_pred->lambda_min_pred == 0.05);
  CHECK(spec.gbr_pred->lambda_max_pred == 0.1);
  CHECK(*spec.bounds == LambdaBounds{1.0, 10.0});

  CHECK_THROWS_AS(lambda_from_gbr(GbrModel{}, constant_model(0.1), g), DataError);
  CHECK_THROWS_AS(lambda_from_gbr(constant_model(-0.1), constant_model(0.05), g), StrategyError);
}

TEST_CASE("lambda_from_gbr reproduces a memorized training midpoint") {
  // Distinct graphs, each with its own multiplier pair; a deep forest learns
  // them and the prediction on a training graph returns its midpoint.
  std::vector<Graph> graphs;
  std::vector<LambdaRangeRow> rows;
  Dataset lo, hi;
  lo.features.resize(20, 3);
  lo.targets.resize(20);
  hi = lo;
  for (int k = 0; k < 20; ++k) {
    const Graph g = generate_er(20 + 2 * k, 0.3, static_cast<std::uint64_t>(k));
    const double lmin = 0.01 * (k + 1), lmax = lmin + 0.05;
    lo.features.row(k) = lambda_features(g.node_count(), density(g), lambda_est(g));
    hi.features.row(k) = lo.features.row(k);
    lo.targets[k] = lmin;
    hi.targets[k] = lmax;
    graphs.push_back(g);
  }
  const GbrParams params{200, 0.1, 6, 1};
  const GbrModel model_min = fit_gbr(lo, params);
  const GbrModel model_max = fit_gbr(hi, params);
  for (int k = 0; k < 20; ++k) {
    const LambdaSpec spec = lambda_from_gbr(model_min, model_max, graphs[static_cast<std::size_t>(k)]);
    const double midpoint = (lo.targets[k] + hi.targets[k]) / 2.0;
    CHECK(spec.lambda / *spec.lambda_est == doctest::Approx(midpoint).epsilon(1e-3));
  }
}

TEST_CASE("tradeoff_terms") {
  const auto none = tradeoff_terms(10, 2.0, 0);
  CHECK(none.cut_worstcase == 0.0);
  CHECK(none.penalty == 2.0 * 100 / 4.0);
  const auto half = tradeoff_terms(10, 2.0, 5);
  CHECK(half.cut_worstcase == -25.0);
  CHECK(half.penalty == 0.0);
  const auto one = tradeoff_terms(4, 1.0, 1);
  CHECK(one.cut_worstcase == -3.0);
  CHECK(one.penalty == 1.0);
  CHECK_THROWS_AS(tradeoff_terms(4, 1.0, 5), InvalidArgument);
}

TEST_CASE("penalty dominates the worst-case cut change for lambda >= 1") {
  // d/dx of the penalty is lambda(2x - n); of the worst-case cut, (2x - n).
  // For x <= n/2 both are <= 0 and lambda(2x - n) <= (2x - n) iff lambda >= 1.
  for (double lambda : {1.0, 1.5, 2.0}) {
    for (NodeId n = 4; n <= 40; ++n) {
      for (NodeId x = 0; 2 * x <= n; ++x) {
        const double slope = 2.0 * x - n;
        CHECK(lambda * slope <= slope);
      }
      for (NodeId x1 = 0; 2 * x1 <= n; ++x1) {
        for (NodeId x2 = x1 + 1; 2 * x2 <= n; ++x2) {
          const auto a = tradeoff_terms(n, lambda, x1), b = tradeoff_terms(n, lambda, x2);
          const double penalty_drop = a.penalty - b.penalty;
          const double cut_rise = a.cut_worstcase - b.cut_worstcase;
          CHECK(penalty_drop >= cut_rise - 1e-9);
        }
      }
    }
  }
  // Below 1 the inequality fails somewhere.
  const double slope = 2.0 * 0 - 10;
  CHECK_FALSE(0.5 * slope <= slope);
}

TEST_CASE("lambda above the max degree forces balanced minimizers") {
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const NodeId n = static_cast<NodeId>(4 + 2 * (rng() % 5));
    const Graph g = generate_er(n, 0.2 + 0.1 * static_cast<double>(rng() % 7), rng());
    const double lambda = max_degree(g) + 1.0;
    const auto bf = testing::brute_force_mbp(g, lambda);
    for (const auto& side : bf.minimizers) {
      int ones = 0;
      for (int s : side) ones += s;
      CHECK(2 * ones == n);
    }
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("resolve_lambda") {
  const Graph g = generate_er(20, 0.5, 4);
  const double est = lambda_est(g);

  const LambdaSpec maxcut = resolve_lambda(g, MaxcutStrategy{});
  CHECK(maxcut.strategy == LambdaStrategyKind::MaxcutP);
  CHECK(maxcut.lambda == lambda_maxcut(20, 0.5));
  CHECK(*maxcut.p_used == 0.5);

  const LambdaSpec e = resolve_lambda(g, EstStrategy{});
  CHECK(e.lambda == est);
  CHECK(*e.lambda_est == est);

  const LambdaSpec m = resolve_lambda(g, MultStrategy{0.1});
  CHECK(m.lambda == est * 0.1);
  CHECK(*m.multiplier == 0.1);
  CHECK(m.strategy == LambdaStrategyKind::EstTimesMult);

  const LambdaSpec f = resolve_lambda(g, FixedStrategy{2.5});
  CHECK(f.lambda == 2.5);
  CHECK(f.strategy == LambdaStrategyKind::Fixed);

  const LambdaSpec gb = resolve_lambda(g, GbrStrategy{std::make_shared<GbrModel>(constant_model(0.1)),
                                                      std::make_shared<GbrModel>(constant_model(0.3))});
  CHECK(gb.lambda == doctest::Approx(est * 0.2));

  CHECK_THROWS_AS(resolve_lambda(path_graph(4), MaxcutStrategy{}), StrategyError);
  for (const LambdaStrategy s : {LambdaStrategy{MaxcutStrategy{}}, LambdaStrategy{EstStrategy{}},
                                 LambdaStrategy{MultStrategy{0.1}}, LambdaStrategy{FixedStrategy{1.0}}}) {
    CHECK_THROWS_AS(resolve_lambda(generate_er(6, 0.0, 1), s), StrategyError);
  }
  CHECK_THROWS_AS(resolve_lambda(g, GbrStrategy{}), StrategyError);
  CHECK_THROWS_AS(resolve_lambda(g, FixedStrategy{0.0}), Error);
}

TEST_CASE("strategy names") {
  for (auto kind : {LambdaStrategyKind::MaxcutP, LambdaStrategyKind::Est, LambdaStrategyKind::EstTimesMult,
                    LambdaStrategyKind::Gbr, LambdaStrategyKind::Fixed}) {
    CHECK(parse_strategy_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_strategy_kind("MEDIAN"), InvalidArgument);
}
