#pragma once

// Penalty-parameter (lambda) strategies for the bisection QUBO.
//
//   MAXCUT_P        lambda = n^2 p / 4, the expected max cut of G(n, p)
//   EST             lambda = (1 + min(maxdeg, n/2 - 1)) / 2, the midpoint of
//                   the analytic interval [1, min(maxdeg, n/2 - 1)]
//   EST_TIMES_MULT  lambda = lambda_est * multiplier
//   GBR             lambda = lambda_est * (pred_min + pred_max) / 2
//   FIXED           caller-supplied value

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mbp/gbr.hpp"
#include "mbp/graph.hpp"

namespace mbp {

enum class LambdaStrategyKind { MaxcutP, Est, EstTimesMult, Gbr, Fixed };

std::string_view to_string(LambdaStrategyKind kind);
LambdaStrategyKind parse_strategy_kind(std::string_view text);

struct LambdaBounds {
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const LambdaBounds&, const LambdaBounds&) = default;
};

struct GbrPrediction {
  double lambda_min_pred = 0.0;
  double lambda_max_pred = 0.0;

  friend bool operator==(const GbrPrediction&, const GbrPrediction&) = default;
};

// Final lambda plus every intermediate quantity that produced it.
struct LambdaSpec {
  LambdaStrategyKind strategy = LambdaStrategyKind::Fixed;
  double lambda = 0.0;
  std::optional<double> lambda_est;
  std::optional<double> multiplier;
  std::optional<LambdaBounds> bounds;
  std::optional<GbrPrediction> gbr_pred;
  std::optional<double> p_used;

  friend bool operator==(const LambdaSpec&, const LambdaSpec&) = default;
};

double lambda_maxcut(NodeId n, double p);

// lower = 1, upper = min(maxdeg, n/2 - 1). Requires even n >= 4; throws
// StrategyError when upper < lower (e.g. the empty graph).
LambdaBounds lambda_bounds(const Graph& g);

double lambda_est(const Graph& g);

// Multiplier candidates by graph size. Sizes between the tabulated ones use
// the nearest tabulated size, ties toward the smaller one.
std::vector<double> lambda_mult_candidates(NodeId n);

double lambda_final(double lambda_est, double multiplier);

LambdaSpec lambda_from_gbr(const GbrModel& model_min, const GbrModel& model_max, const Graph& g);

// Worst-case cut change x(x - n) and penalty lambda (n/2 - x)^2 after moving
// x nodes out of an all-in-one-set assignment.
struct TradeoffTerms {
  double cut_worstcase = 0.0;
  double penalty = 0.0;
};
TradeoffTerms tradeoff_terms(NodeId n, double lambda, std::int64_t moved);

struct MaxcutStrategy {};
struct EstStrategy {};
struct MultStrategy {
  double multiplier = 1.0;
};
struct GbrStrategy {
  std::shared_ptr<const GbrModel> model_min;
  std::shared_ptr<const GbrModel> model_max;
};
struct FixedStrategy {
  double value = 1.0;
};

using LambdaStrategy = std::variant<MaxcutStrategy, EstStrategy, MultStrategy, GbrStrategy, FixedStrategy>;

// Throws StrategyError when the strategy cannot be applied to `g`.
LambdaSpec resolve_lambda(const Graph& g, const LambdaStrategy& strategy);

}  // namespace mbp
