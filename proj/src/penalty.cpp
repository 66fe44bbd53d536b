#include "mbp/penalty.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "mbp/error.hpp"

namespace mbp {

namespace {

struct MultiplierBucket {
  std::vector<NodeId> sizes;
  std::vector<double> multipliers;
};

// Tabulated multiplier sets by graph size. The 2500-4000 row is one set.
const std::vector<MultiplierBucket>& multiplier_table() {
  static const std::vector<MultiplierBucket> table = {
      {{100, 200}, {0.05, 0.1, 0.2, 0.4}},
      {{300, 400, 500}, {0.005, 0.01, 0.03, 0.05, 0.1, 0.2}},
      {{600, 700, 800, 900}, {0.005, 0.01, 0.03, 0.05, 0.1}},
      {{1000, 1200, 1400}, {0.002, 0.005, 0.01, 0.03, 0.05, 0.1}},
      {{1600, 1800, 2000}, {0.002, 0.005, 0.01, 0.03, 0.05, 0.1}},
      {{2500, 3000, 3500, 4000}, {0.0005, 0.001, 0.002, 0.005, 0.01, 0.03, 0.05, 0.1}},
  };
  return table;
}

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(LambdaStrategyKind kind) {
  switch (kind) {
    case LambdaStrategyKind::MaxcutP: return "MAXCUT_P";
    case LambdaStrategyKind::Est: return "EST";
    case LambdaStrategyKind::EstTimesMult: return "EST_TIMES_MULT";
    case LambdaStrategyKind::Gbr: return "GBR";
    case LambdaStrategyKind::Fixed: return "FIXED";
  }
  return "FIXED";
}

LambdaStrategyKind parse_strategy_kind(std::string_view text) {
  for (auto kind : {LambdaStrategyKind::MaxcutP, LambdaStrategyKind::Est, LambdaStrategyKind::EstTimesMult,
                    LambdaStrategyKind::Gbr, LambdaStrategyKind::Fixed}) {
    if (to_string(kind) == text) return kind;
  }
  throw InvalidArgument("unknown lambda strategy '" + std::string(text) + "'");
}

double lambda_maxcut(NodeId n, double p) {
  if (n < 2) throw InvalidArgument("lambda_maxcut: n must be >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("lambda_maxcut: p must lie in [0, 1]");
  const double nn = n;
  return nn * nn * p / 4.0;
}

LambdaBounds lambda_bounds(const Graph& g) {
  const NodeId n = g.node_count();
  if (n < 4 || n % 2 != 0) throw InvalidArgument("lambda_bounds: need an even node count >= 4");
  const double upper = std::min<double>(max_degree(g), n / 2 - 1);
  if (upper < 1.0) {
    throw StrategyError("degenerate instance: lambda interval [1, " + std::to_string(upper) +
                        "] is empty (max degree " + std::to_string(max_degree(g)) + ")");
  }
  return {1.0, upper};
}

double lambda_est(const Graph& g) {
  const auto [lower, upper] = lambda_bounds(g);
  return (lower + upper) / 2.0;
}

std::vector<double> lambda_mult_candidates(NodeId n) {
  if (n < 2) throw InvalidArgument("lambda_mult_candidates: n must be >= 2");
  const MultiplierBucket* best = nullptr;
  NodeId best_distance = 0;
  NodeId best_size = 0;
  for (const auto& bucket : multiplier_table()) {
    for (NodeId size : bucket.sizes) {
      const NodeId distance = std::abs(size - n);
      if (!best || distance < best_distance || (distance == best_distance && size < best_size)) {
        best = &bucket;
        best_distance = distance;
        best_size = size;
      }
    }
  }
  return best->multipliers;
}

double lambda_final(double lambda_est, double multiplier) {
  require_positive(lambda_est, "lambda_est");
  require_positive(multiplier, "multiplier");
  return lambda_est * multiplier;
}

LambdaSpec lambda_from_gbr(const GbrModel& model_min, const GbrModel& model_max, const Graph& g) {
  if (!model_min.trained() || !model_max.trained()) throw DataError("lambda_from_gbr: untrained model");
  LambdaSpec spec;
  spec.strategy = LambdaStrategyKind::Gbr;
  spec.bounds = lambda_bounds(g);
  spec.lambda_est = (spec.bounds->lower + spec.bounds->upper) / 2.0;
  const FeatureRow features = lambda_features(g.node_count(), density(g), *spec.lambda_est);
  spec.gbr_pred = GbrPrediction{predict_row(model_min, features), predict_row(model_max, features)};
  const double midpoint = (spec.gbr_pred->lambda_min_pred + spec.gbr_pred->lambda_max_pred) / 2.0;
  spec.lambda = *spec.lambda_est * midpoint;
  if (!(spec.lambda > 0.0)) {
    throw StrategyError("lambda_from_gbr: predicted multiplier midpoint " + std::to_string(midpoint) +
                        " is not positive");
  }
  return spec;
}

TradeoffTerms tradeoff_terms(NodeId n, double lambda, std::int64_t moved) {
  if (moved < 0 || moved > n) throw InvalidArgument("tradeoff_terms: need 0 <= x <= n");
  const double x = static_cast<double>(moved);
  const double half = n / 2.0;
  return {x * (x - n), lambda * (half - x) * (half - x)};
}

LambdaSpec resolve_lambda(const Graph& g, const LambdaStrategy& strategy) {
  if (g.edge_count() == 0) throw StrategyError("degenerate instance: graph has no edges");
  return std::visit(
      [&](const auto& s) -> LambdaSpec {
        using S = std::decay_t<decltype(s)>;
        LambdaSpec spec;
        if constexpr (std::is_same_v<S, MaxcutStrategy>) {
          if (!g.meta()) {
            throw StrategyError("MAXCUT_P needs the edge probability p, which this graph does not carry");
          }
          spec.strategy = LambdaStrategyKind::MaxcutP;
          spec.p_used = g.meta()->edge_probability;
          spec.lambda = lambda_maxcut(g.node_count(), *spec.p_used);
          if (!(spec.lambda > 0.0)) throw StrategyError("MAXCUT_P: p = 0 gives lambda = 0");
        } else if constexpr (std::is_same_v<S, EstStrategy>) {
          spec.strategy = LambdaStrategyKind::Est;
          spec.bounds = lambda_bounds(g);
          spec.lambda_est = (spec.bounds->lower + spec.bounds->upper) / 2.0;
          spec.lambda = *spec.lambda_est;
        } else if constexpr (std::is_same_v<S, MultStrategy>) {
          spec.strategy = LambdaStrategyKind::EstTimesMult;
          spec.bounds = lambda_bounds(g);
          spec.lambda_est = (spec.bounds->lower + spec.bounds->upper) / 2.0;
          spec.multiplier = s.multiplier;
          spec.lambda = lambda_final(*spec.lambda_est, s.multiplier);
        } else if constexpr (std::is_same_v<S, GbrStrategy>) {
          if (!s.model_min || !s.model_max) throw StrategyError("GBR strategy without models");
          spec = lambda_from_gbr(*s.model_min, *s.model_max, g);
        } else {
          require_positive(s.value, "fixed lambda");
          spec.strategy = LambdaStrategyKind::Fixed;
          spec.lambda = s.value;
        }
        return spec;
      },
      strategy);
}

}  // namespace mbp
