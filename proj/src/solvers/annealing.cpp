#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mbp/error.hpp"
#include "mbp/rng.hpp"
#include "mbp/detail/sa_models.hpp"
#include "mbp/solvers.hpp"

namespace mbp {

namespace {

using detail::DenseQuboModel;
using detail::ImplicitMbpModel;

constexpr int kAutoTemperatureSamples = 1000;
constexpr double kAutoTemperatureQuantile = 0.95;
constexpr double kRelativeFinalTemperature = 1e-3;

template <typename Model>
double auto_temperature(const Model& model, Xoshiro256& rng) {
  std::vector<double> samples(kAutoTemperatureSamples);
  for (auto& s : samples) s = std::abs(model.delta(static_cast<Eigen::Index>(rng.below(model.size()))));
  const auto rank = static_cast<std::size_t>(kAutoTemperatureQuantile * (samples.size() - 1));
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank), samples.end());
  const double t = samples[rank];
  return t > 0.0 ? t : 1.0;
}

template <typename Model>
SolveResult anneal(Model& model, const SaParams& params, std::uint64_t seed, const char* solver_id) {
  params.validate();
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = model.size();

  PartitionAssignment best = PartitionAssignment::Zero(n);
  double best_energy = std::numeric_limits<double>::infinity();
  std::int64_t proposals = 0;

  for (int restart = 0; restart < params.restarts; ++restart) {
    Xoshiro256 rng(seed ^ static_cast<std::uint64_t>(restart));
    PartitionAssignment x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.coin() ? 1 : 0;
    model.reset(x);

    const double t_initial = params.t_initial ? *params.t_initial : auto_temperature(model, rng);
    const double t_final = params.t_final ? *params.t_final : kRelativeFinalTemperature * t_initial;

    double current = 0.0;  // relative to the start state
    double run_best = 0.0;
    PartitionAssignment run_best_state = model.state();
    double t = t_initial;
    for (int sweep = 0; sweep < params.sweeps; ++sweep) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = model.delta(i);
        const double u = rng.uniform01();
        if (d <= 0.0 || u < std::exp(-d / t)) {
          model.flip(i);
          current += d;
          if (current < run_best) {
            run_best = current;
            run_best_state = model.state();
          }
        }
      }
      proposals += n;
      t = std::max(t * params.cooling, t_final);
    }

    const double run_energy = model.exact_energy(run_best_state);
    if (run_energy < best_energy) {
      best_energy = run_energy;
      best = std::move(run_best_state);
    }
  }

  SolveResult result;
  result.solver_id = solver_id;
  result.assignment = std::move(best);
  result.energy = n == 0 ? model.exact_energy(result.assignment) : best_energy;
  result.balance_deviation = balance_deviation(result.assignment);
  result.balanced = result.balance_deviation == 0;
  result.seed = seed;
  result.iterations = proposals;
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace

void SaParams::validate() const {
  if (sweeps < 1) throw InvalidArgument("sa: sweeps must be >= 1");
  if (restarts < 1) throw InvalidArgument("sa: restarts must be >= 1");
  if (!(cooling > 0.0 && cooling < 1.0)) throw InvalidArgument("sa: cooling must lie in (0, 1)");
  if (t_initial && !(*t_initial > 0.0)) throw InvalidArgument("sa: t_initial must be positive");
  if (t_final && !(*t_final > 0.0)) throw InvalidArgument("sa: t_final must be positive");
}

SolveResult solve_sa(const QuboMatrix& q, const SaParams& params, std::uint64_t seed) {
  DenseQuboModel model(q);
  return anneal(model, params, seed, "sa");
}

SolveResult solve_sa_mbp(const Graph& g, double lambda, const SaParams& params, std::uint64_t seed) {
  require_even_order(g);
  if (!(lambda > 0.0)) throw InvalidArgument("sa-mbp: lambda must be positive");
  ImplicitMbpModel model(g, lambda);
  SolveResult result = anneal(model, params, seed, "sa-mbp");
  attach_graph_metrics(result, g);
  return result;
}

}  // namespace mbp
