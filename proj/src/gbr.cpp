#include "mbp/gbr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mbp/detail/format.hpp"
#include "mbp/error.hpp"
#include "mbp/rng.hpp"

namespace mbp {

namespace {

using Index = Eigen::Index;

// Shifting by the first element makes the mean of a constant vector exact.
template <typename Values>
double stable_mean(const Values& values, const std::vector<Index>& rows) {
  if (rows.empty()) return 0.0;
  const double anchor = values[rows.front()];
  double shifted = 0.0;
  for (Index r : rows) shifted += values[r] - anchor;
  return anchor + shifted / static_cast<double>(rows.size());
}

std::vector<Index> all_rows(Index count) {
  std::vector<Index> rows(static_cast<std::size_t>(count));
  std::iota(rows.begin(), rows.end(), Index{0});
  return rows;
}

// Splits whose SSE reduction is below this fraction of the node SSE are
// treated as rounding noise.
constexpr double kRelativeMinGain = 1e-12;

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const Eigen::VectorXd& residuals, int max_depth, int min_samples_leaf)
      : ds_(ds), residuals_(residuals), max_depth_(max_depth), min_leaf_(min_samples_leaf) {}

  std::vector<RegressionTree::Node> build() {
    grow(all_rows(ds_.rows()), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
  };

  int grow(std::vector<Index> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    const double mean = stable_mean(residuals_, rows);
    nodes_[id].value = mean;
    if (depth >= max_depth_ || rows.size() < 2 * static_cast<std::size_t>(min_leaf_)) return id;

    const Split split = best_split(rows, mean);
    if (split.feature < 0) return id;

    std::vector<Index> left, right;
    left.reserve(split.left_count);
    right.reserve(rows.size() - split.left_count);
    for (Index r : rows) {
      (ds_.features(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const int l = grow(std::move(left), depth + 1);
    nodes_[id].left = l;
    const int r = grow(std::move(right), depth + 1);
    nodes_[id].right = r;
    return id;
  }

  Split best_split(const std::vector<Index>& rows, double mean) const {
    const auto count = rows.size();
    double total = 0.0, sse = 0.0;
    for (Index r : rows) {
      const double c = residuals_[r] - mean;
      total += c;
      sse += c * c;
    }
    Split best;
    if (!(sse > 0.0)) return best;
    const double base = total * total / static_cast<double>(count);

    std::vector<Index> order(rows);
    for (int f = 0; f < static_cast<int>(ds_.feature_count()); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return ds_.features(a, f) < ds_.features(b, f);
      });
      double left_sum = 0.0;
      for (std::size_t k = 0; k + 1 < count; ++k) {
        left_sum += residuals_[order[k]] - mean;
        const std::size_t n_left = k + 1;
        const std::size_t n_right = count - n_left;
        if (n_left < static_cast<std::size_t>(min_leaf_)) continue;
        if (n_right < static_cast<std::size_t>(min_leaf_)) break;
        const double lo = ds_.features(order[k], f);
        const double hi = ds_.features(order[k + 1], f);
        if (!(lo < hi)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(n_right) - base;
        if (gain > best.gain) {
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          best = {f, threshold, gain, n_left};
        }
      }
    }
    if (best.feature >= 0 && !(best.gain > kRelativeMinGain * sse)) best = {};
    return best;
  }

  const Dataset& ds_;
  const Eigen::VectorXd& residuals_;
  int max_depth_;
  int min_leaf_;
  std::vector<RegressionTree::Node> nodes_;
};

double mean_square(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.squaredNorm() / static_cast<double>(v.size());
}

void require_trained(const GbrModel& model) {
  if (!model.trained()) throw DataError("gbr: model is not trained");
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() != targets.size()) throw DataError("dataset: feature/target row count mismatch");
  if (features.rows() == 0 || features.cols() == 0) throw DataError("dataset: empty");
  if (!features.allFinite() || !targets.allFinite()) throw DataError("dataset: non-finite values");
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out{FeatureMatrix(static_cast<Index>(rows.size()), features.cols()),
              Eigen::VectorXd(static_cast<Index>(rows.size()))};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.features.row(static_cast<Index>(k)) = features.row(rows[k]);
    out.targets[static_cast<Index>(k)] = targets[rows[k]];
  }
  return out;
}

RegressionTree::RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree: no nodes");
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& node = nodes_[k];
    if (node.is_leaf()) continue;
    const auto size = static_cast<int>(nodes_.size());
    if (node.left <= static_cast<int>(k) || node.right <= static_cast<int>(k) || node.left >= size ||
        node.right >= size || !std::isfinite(node.threshold)) {
      throw DataError("tree: malformed split node " + std::to_string(k));
    }
  }
}

double RegressionTree::predict(const Eigen::Ref<const FeatureRow>& row) const {
  int id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& node = nodes_[id];
    id = row[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[id].value;
}

int RegressionTree::depth() const {
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    deepest = std::max(deepest, level[k]);
    if (!nodes_[k].is_leaf()) level[nodes_[k].left] = level[nodes_[k].right] = level[k] + 1;
  }
  return deepest;
}

int RegressionTree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const Node& n) { return n.is_leaf(); }));
}

RegressionTree fit_tree(const Dataset& ds, const Eigen::VectorXd& residuals, int max_depth,
                        int min_samples_leaf) {
  ds.validate();
  if (residuals.size() != ds.rows()) throw DataError("fit_tree: residual length mismatch");
  if (max_depth < 0 || min_samples_leaf < 1) throw InvalidArgument("fit_tree: bad tree parameters");
  return RegressionTree(TreeBuilder(ds, residuals, max_depth, min_samples_leaf).build());
}

GbrModel fit_gbr(const Dataset& ds, const GbrParams& params) {
  ds.validate();
  if (ds.rows() < 2) throw DataError("fit_gbr: need at least 2 samples");
  if (params.n_trees < 0 || params.max_depth < 0 || params.min_samples_leaf < 1 ||
      !(params.learning_rate >= 0.0 && params.learning_rate <= 1.0)) {
    throw InvalidArgument("fit_gbr: invalid parameters");
  }

  GbrModel model;
  model.params = params;
  model.feature_count = ds.feature_count();
  model.init_value = stable_mean(ds.targets, all_rows(ds.rows()));

  Eigen::VectorXd residuals = ds.targets.array() - model.init_value;
  model.train_mse.push_back(mean_square(residuals));
  model.trees.reserve(static_cast<std::size_t>(params.n_trees));
  Eigen::VectorXd step(ds.rows());
  for (int t = 0; t < params.n_trees; ++t) {
    RegressionTree tree = fit_tree(ds, residuals, params.max_depth, params.min_samples_leaf);
    for (Index r = 0; r < ds.rows(); ++r) step[r] = tree.predict(ds.features.row(r));
    residuals -= params.learning_rate * step;
    model.train_mse.push_back(mean_square(residuals));
    model.trees.push_back(std::move(tree));
  }
  model.training_metrics = evaluate(model, ds);
  return model;
}

double predict_row(const GbrModel& model, const Eigen::Ref<const FeatureRow>& row) {
  require_trained(model);
  if (row.size() != model.feature_count) {
    throw InvalidArgument("predict: expected " + std::to_string(model.feature_count) +
                          " features, got " + std::to_string(row.size()));
  }
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree.predict(row);
  return model.init_value + model.params.learning_rate * sum;
}

Eigen::VectorXd predict(const GbrModel& model, const FeatureMatrix& rows) {
  Eigen::VectorXd out(rows.rows());
  for (Index r = 0; r < rows.rows(); ++r) out[r] = predict_row(model, rows.row(r));
  return out;
}

EvalMetrics evaluate_predictions(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted) {
  if (truth.size() != predicted.size() || truth.size() == 0) {
    throw InvalidArgument("evaluate: need equal, non-empty vectors");
  }
  const double count = static_cast<double>(truth.size());
  const Eigen::ArrayXd error = (truth - predicted).array();
  const double ss_res = error.square().sum();
  const double mean = stable_mean(truth, all_rows(truth.size()));
  const double ss_tot = (truth.array() - mean).square().sum();

  EvalMetrics m;
  m.rmse = std::sqrt(ss_res / count);
  m.mae = error.abs().sum() / count;
  if (ss_tot == 0.0) {
    m.r2 = ss_res == 0.0 ? 1.0 : 0.0;
  } else {
    m.r2 = 1.0 - ss_res / ss_tot;
  }
  return m;
}

EvalMetrics evaluate(const GbrModel& model, const Dataset& ds) {
  ds.validate();
  return evaluate_predictions(ds.targets, predict(model, ds.features));
}

namespace {

constexpr const char* kModelMagic = "mbp-gbr-model";
constexpr int kModelVersion = 1;

using detail::format_double;

template <typename T>
void expect_field(std::istream& in, const char* name, T& value) {
  std::string tag;
  if (!(in >> tag) || tag != name || !(in >> value)) {
    throw DataError(std::string("model file: expected '") + name + "'");
  }
}

// from_chars: locale-independent and exact for shortest-form output.
double read_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw DataError("model file: truncated");
  double value = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw DataError("model file: bad number '" + token + "'");
  return value;
}

}  // namespace

void write_model(std::ostream& out, const GbrModel& model) {
  require_trained(model);
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "feature_count " << model.feature_count << '\n';
  out << "params " << model.params.n_trees << ' ' << format_double(model.params.learning_rate) << ' '
      << model.params.max_depth << ' ' << model.params.min_samples_leaf << '\n';
  out << "split_seed " << model.split_seed << '\n';
  out << "init " << format_double(model.init_value) << '\n';
  out << "training_metrics " << format_double(model.training_metrics.rmse) << ' '
      << format_double(model.training_metrics.mae) << ' ' << format_double(model.training_metrics.r2)
      << '\n';
  out << "train_mse " << model.train_mse.size();
  for (double v : model.train_mse) out << ' ' << format_double(v);
  out << '\n';
  out << "trees " << model.trees.size() << '\n';
  for (const auto& tree : model.trees) {
    out << "tree " << tree.nodes().size() << '\n';
    for (const auto& node : tree.nodes()) {
      out << node.feature << ' ' << format_double(node.threshold) << ' ' << format_double(node.value)
          << ' ' << node.left << ' ' << node.right << '\n';
    }
  }
  out << "end\n";
}

GbrModel read_model(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) throw DataError("model file: bad header");
  if (version != kModelVersion) {
    throw SchemaError("model file: version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kModelVersion) + ")");
  }
  GbrModel model;
  expect_field(in, "feature_count", model.feature_count);
  std::string tag;
  if (!(in >> tag) || tag != "params" || !(in >> model.params.n_trees)) throw DataError("model file: params");
  model.params.learning_rate = read_double(in);
  if (!(in >> model.params.max_depth >> model.params.min_samples_leaf)) throw DataError("model file: params");
  expect_field(in, "split_seed", model.split_seed);
  if (!(in >> tag) || tag != "init") throw DataError("model file: init");
  model.init_value = read_double(in);
  if (!(in >> tag) || tag != "training_metrics") throw DataError("model file: training_metrics");
  model.training_metrics.rmse = read_double(in);
  model.training_metrics.mae = read_double(in);
  model.training_metrics.r2 = read_double(in);
  std::size_t count = 0;
  expect_field(in, "train_mse", count);
  model.train_mse.resize(count);
  for (auto& v : model.train_mse) v = read_double(in);
  expect_field(in, "trees", count);
  model.trees.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::size_t node_count = 0;
    expect_field(in, "tree", node_count);
    std::vector<RegressionTree::Node> nodes(node_count);
    for (auto& node : nodes) {
      if (!(in >> node.feature)) throw DataError("model file: truncated tree");
      node.threshold = read_double(in);
      node.value = read_double(in);
      if (!(in >> node.left >> node.right)) throw DataError("model file: truncated tree");
      if (node.feature >= model.feature_count) throw DataError("model file: feature index out of range");
    }
    model.trees.emplace_back(std::move(nodes));
  }
  if (!(in >> tag) || tag != "end") throw DataError("model file: missing 'end'");
  if (model.feature_count <= 0) throw DataError("model file: feature_count must be positive");
  return model;
}

void save_model(const GbrModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_model(out, model);
  if (!out) throw DataError("failed writing " + path.string());
}

GbrModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model " + path.string());
  return read_model(in);
}

FeatureRow lambda_features(double n, double density, double lambda_est) {
  FeatureRow row(kLambdaFeatureCount);
  row << n, density, lambda_est;
  return row;
}

LambdaModels train_lambda_models(const std::vector<LambdaRangeRow>& rows, std::uint64_t split_seed,
                                 const GbrParams& params) {
  if (rows.size() < kMinTrainingRows) {
    throw DataError("train: need at least " + std::to_string(kMinTrainingRows) + " rows, got " +
                    std::to_string(rows.size()));
  }
  const auto count = static_cast<Index>(rows.size());
  Dataset lower{FeatureMatrix(count, kLambdaFeatureCount), Eigen::VectorXd(count)};
  Dataset upper{FeatureMatrix(count, kLambdaFeatureCount), Eigen::VectorXd(count)};
  for (Index r = 0; r < count; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    lower.features.row(r) = lambda_features(static_cast<double>(row.n), row.density, row.lambda_est);
    lower.targets[r] = row.lambda_min;
    upper.targets[r] = row.lambda_max;
  }
  upper.features = lower.features;

  std::vector<Index> order = all_rows(count);
  Xoshiro256 rng(split_seed);
  rng.shuffle(std::span<Index>(order));
  const auto test_count = static_cast<std::size_t>(std::max<Index>(1, (count + 2) / 5));
  const std::vector<Index> test_rows(order.end() - static_cast<std::ptrdiff_t>(test_count), order.end());
  const std::vector<Index> train_rows(order.begin(), order.end() - static_cast<std::ptrdiff_t>(test_count));

  LambdaModels out;
  out.train_rows = train_rows.size();
  out.test_rows = test_rows.size();
  out.min_model = fit_gbr(lower.subset(train_rows), params);
  out.max_model = fit_gbr(upper.subset(train_rows), params);
  out.min_model.split_seed = out.max_model.split_seed = split_seed;
  out.test_min = evaluate(out.min_model, lower.subset(test_rows));
  out.test_max = evaluate(out.max_model, upper.subset(test_rows));
  return out;
}

void save_lambda_models(const LambdaModels& models, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_model(models.min_model, dir / "gbr_min.model");
  save_model(models.max_model, dir / "gbr_max.model");
  std::ofstream csv(dir / "metrics.csv");
  if (!csv) throw DataError("cannot write " + (dir / "metrics.csv").string());
  csv << "target,rmse,mae,r2,train_rows,test_rows\n";
  auto line = [&](const char* name, const EvalMetrics& m) {
    csv << name << ',' << format_double(m.rmse) << ',' << format_double(m.mae) << ','
        << format_double(m.r2) << ',' << models.train_rows << ',' << models.test_rows << '\n';
  };
  line("lambda_min", models.test_min);
  line("lambda_max", models.test_max);
}

LambdaModels load_lambda_models(const std::filesystem::path& dir) {
  LambdaModels models;
  models.min_model = load_model(dir / "gbr_min.model");
  models.max_model = load_model(dir / "gbr_max.model");
  std::ifstream csv(dir / "metrics.csv");
  std::string line;
  if (csv && std::getline(csv, line)) {
    while (std::getline(csv, line)) {
      std::istringstream fields(line);
      std::string name, cell;
      std::getline(fields, name, ',');
      EvalMetrics m;
      double* slots[] = {&m.rmse, &m.mae, &m.r2};
      for (double* slot : slots) {
        std::getline(fields, cell, ',');
        std::istringstream(cell) >> *slot;
      }
      std::getline(fields, cell, ',');
      models.train_rows = std::stoul(cell);
      std::getline(fields, cell, ',');
      models.test_rows = std::stoul(cell);
      (name == "lambda_min" ? models.test_min : models.test_max) = m;
    }
  }
  return models;
}

}  // namespace mbp
