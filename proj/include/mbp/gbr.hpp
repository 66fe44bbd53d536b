#pragma once

// Gradient-boosted regression trees (squared-error loss, mean-valued leaves)
// used to predict the lower and upper lambda multipliers of a graph from the
// feature row (n, density, lambda_est).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mbp {

using FeatureMatrix = Eigen::MatrixXd;
using FeatureRow = Eigen::RowVectorXd;

inline constexpr Eigen::Index kLambdaFeatureCount = 3;  // (n, density, lambda_est)

struct Dataset {
  FeatureMatrix features;
  Eigen::VectorXd targets;

  Eigen::Index rows() const noexcept { return features.rows(); }
  Eigen::Index feature_count() const noexcept { return features.cols(); }

  // Throws DataError on row mismatch, empty data or non-finite values.
  void validate() const;
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

// Preorder node array; children are indices into the same array.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes);

  // Samples with feature <= threshold go left.
  double predict(const Eigen::Ref<const FeatureRow>& row) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int depth() const;
  int leaf_count() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<Node> nodes_;
};

struct GbrParams {
  int n_trees = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 1;

  friend bool operator==(const GbrParams&, const GbrParams&) = default;
};

struct EvalMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;

  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

struct GbrModel {
  double init_value = 0.0;
  std::vector<RegressionTree> trees;
  GbrParams params;
  Eigen::Index feature_count = 0;  // 0 until trained
  std::uint64_t split_seed = 0;
  std::vector<double> train_mse;  // index k: after k trees (k = 0 is the mean)
  EvalMetrics training_metrics;

  bool trained() const noexcept { return feature_count > 0; }

  friend bool operator==(const GbrModel&, const GbrModel&) = default;
};

// Greedy CART regression tree on `residuals`: exhaustive search over
// midpoints between consecutive distinct sorted feature values, leaf value
// is the mean residual. max_depth = 0 gives a single leaf.
RegressionTree fit_tree(const Dataset& ds, const Eigen::VectorXd& residuals, int max_depth,
                        int min_samples_leaf);

GbrModel fit_gbr(const Dataset& ds, const GbrParams& params = {});

double predict_row(const GbrModel& model, const Eigen::Ref<const FeatureRow>& row);
Eigen::VectorXd predict(const GbrModel& model, const FeatureMatrix& rows);

EvalMetrics evaluate_predictions(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted);
EvalMetrics evaluate(const GbrModel& model, const Dataset& ds);

// Versioned text format; doubles are written in shortest round-trip form
// so load(save(m)) == m exactly.
void write_model(std::ostream& out, const GbrModel& model);
GbrModel read_model(std::istream& in);
void save_model(const GbrModel& model, const std::filesystem::path& path);
GbrModel load_model(const std::filesystem::path& path);

// One training row per graph: the multiplier range that reached the minimal
// number of inter-edges over a sweep.
struct LambdaRangeRow {
  std::string graph_key;
  std::int64_t n = 0;
  double density = 0.0;
  double lambda_est = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  friend bool operator==(const LambdaRangeRow&, const LambdaRangeRow&) = default;
};

FeatureRow lambda_features(double n, double density, double lambda_est);

struct LambdaModels {
  GbrModel min_model;
  GbrModel max_model;
  EvalMetrics test_min;
  EvalMetrics test_max;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

inline constexpr std::size_t kMinTrainingRows = 10;

// Seeded 80/20 shuffle split, fits both models, evaluates on the held-out
// part. Throws DataError with fewer than kMinTrainingRows rows.
LambdaModels train_lambda_models(const std::vector<LambdaRangeRow>& rows,
                                 std::uint64_t split_seed, const GbrParams& params = {});

// Writes gbr_min.model, gbr_max.model and metrics.csv into `dir`.
void save_lambda_models(const LambdaModels& models, const std::filesystem::path& dir);
LambdaModels load_lambda_models(const std::filesystem::path& dir);

}  // namespace mbp
