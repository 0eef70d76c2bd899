/*
 * Copyright 2026 The phitest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "phitest/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "ols_util.hpp"
#include "phitest/rng.hpp"

namespace phitest {

namespace {

using nlohmann::json;

class LinearPredictor : public Predictor {
 public:
  LinearPredictor(Vector beta, double intercept)
      : beta_(std::move(beta)), intercept_(intercept) {}

  double predict(const Vector& x) const override {
    if (x.size() != beta_.size()) {
      throw std::invalid_argument("linear predictor: dimension mismatch");
    }
    return intercept_ + beta_.dot(x);
  }
  int feature_count() const override { return static_cast<int>(beta_.size()); }
  std::string kind() const override { return "linear"; }

  const Vector& beta() const { return beta_; }
  double intercept() const { return intercept_; }

 private:
  Vector beta_;
  double intercept_;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

using Tree = std::vector<TreeNode>;

template <typename Derived>
double tree_predict(const Tree& tree, const Eigen::MatrixBase<Derived>& x) {
  int node = 0;
  while (tree[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& t = tree[static_cast<std::size_t>(node)];
    node = x(t.feature) <= t.threshold ? t.left : t.right;
  }
  return tree[static_cast<std::size_t>(node)].value;
}

class GbtPredictor : public Predictor {
 public:
  GbtPredictor(std::vector<Tree> trees, double base_score, double learning_rate,
               int p)
      : trees_(std::move(trees)),
        base_score_(base_score),
        learning_rate_(learning_rate),
        p_(p) {}

  double predict(const Vector& x) const override {
    if (static_cast<int>(x.size()) != p_) {
      throw std::invalid_argument("gbt predictor: dimension mismatch");
    }
    double sum = 0.0;
    for (const Tree& t : trees_) sum += tree_predict(t, x);
    return base_score_ + learning_rate_ * sum;
  }
  int feature_count() const override { return p_; }
  std::string kind() const override { return "gbt"; }

  const std::vector<Tree>& trees() const { return trees_; }
  double base_score() const { return base_score_; }
  double learning_rate() const { return learning_rate_; }

 private:
  std::vector<Tree> trees_;
  double base_score_;
  double learning_rate_;
  int p_;
};

class ExternalPredictor : public Predictor {
 public:
  ExternalPredictor(Matrix bound_X, std::map<int, double> predictions)
      : bound_X_(std::move(bound_X)), predictions_(std::move(predictions)) {
    for (int i = 0; i < bound_X_.rows(); ++i) {
      std::vector<double> key(bound_X_.cols());
      for (int j = 0; j < bound_X_.cols(); ++j) key[static_cast<std::size_t>(j)] = bound_X_(i, j);
      row_index_.emplace(std::move(key), i);
    }
  }

  double predict(const Vector& x) const override {
    if (x.size() != bound_X_.cols()) {
      throw std::invalid_argument("external predictor: dimension mismatch");
    }
    std::vector<double> key(static_cast<std::size_t>(x.size()));
    for (int j = 0; j < x.size(); ++j) key[static_cast<std::size_t>(j)] = x(j);
    auto it = row_index_.find(key);
    if (it == row_index_.end()) {
      throw std::runtime_error(
          "external predictor: query vector is not a row of the bound "
          "evaluation set");
    }
    auto pit = predictions_.find(it->second);
    if (pit == predictions_.end()) {
      throw std::runtime_error("external predictor: no prediction for row " +
                               std::to_string(it->second));
    }
    return pit->second;
  }
  int feature_count() const override {
    return static_cast<int>(bound_X_.cols());
  }
  std::string kind() const override { return "external"; }

 private:
  Matrix bound_X_;
  std::map<int, double> predictions_;
  std::map<std::vector<double>, int> row_index_;
};

// --- GBT training -----------------------------------------------------------

struct TreeBuilder {
  const Matrix& X;
  const Vector& residual;
  int max_depth;
  int min_leaf;
  Tree tree;

  int build(std::vector<int>& idx, int depth) {
    double sum = 0.0;
    for (int i : idx) sum += residual(i);
    double mean = sum / static_cast<double>(idx.size());

    TreeNode node;
    node.value = mean;
    if (depth >= max_depth ||
        static_cast<int>(idx.size()) < 2 * min_leaf) {
      tree.push_back(node);
      return static_cast<int>(tree.size()) - 1;
    }

    // Exact greedy search over sorted unique values of every feature.
    double parent_sse_gain = -1.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const int p = static_cast<int>(X.cols());
    std::vector<int> order(idx);
    for (int j = 0; j < p; ++j) {
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (X(a, j) != X(b, j)) return X(a, j) < X(b, j);
        return a < b;
      });
      double total_sum = sum;
      double left_sum = 0.0;
      int n_node = static_cast<int>(order.size());
      for (int k = 0; k < n_node - 1; ++k) {
        left_sum += residual(order[static_cast<std::size_t>(k)]);
        int n_left = k + 1;
        int n_right = n_node - n_left;
        double xa = X(order[static_cast<std::size_t>(k)], j);
        double xb = X(order[static_cast<std::size_t>(k + 1)], j);
        if (xa == xb) continue;
        if (n_left < min_leaf || n_right < min_leaf) continue;
        double right_sum = total_sum - left_sum;
        // Variance reduction up to constants: sum_L^2/n_L + sum_R^2/n_R.
        double gain = left_sum * left_sum / n_left +
                      right_sum * right_sum / n_right;
        if (gain > parent_sse_gain + 1e-15) {
          parent_sse_gain = gain;
          best_feature = j;
          best_threshold = 0.5 * (xa + xb);
        }
      }
    }
    if (best_feature < 0) {
      tree.push_back(node);
      return static_cast<int>(tree.size()) - 1;
    }

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
      (X(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    node.feature = best_feature;
    node.threshold = best_threshold;
    tree.push_back(node);
    int self = static_cast<int>(tree.size()) - 1;
    int left = build(left_idx, depth + 1);
    int right = build(right_idx, depth + 1);
    tree[static_cast<std::size_t>(self)].left = left;
    tree[static_cast<std::size_t>(self)].right = right;
    return self;
  }
};

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const TreeNode& t : tree) {
    nodes.push_back({{"f", t.feature},
                     {"t", t.threshold},
                     {"l", t.left},
                     {"r", t.right},
                     {"v", t.value}});
  }
  return nodes;
}

Tree tree_from_json(const json& nodes) {
  Tree tree;
  for (const auto& n : nodes) {
    TreeNode t;
    t.feature = n.at("f").get<int>();
    t.threshold = n.at("t").get<double>();
    t.left = n.at("l").get<int>();
    t.right = n.at("r").get<int>();
    t.value = n.at("v").get<double>();
    tree.push_back(t);
  }
  return tree;
}

}  // namespace

PredictorPtr fit_linear(const Matrix& X, const Vector& y, double ridge) {
  if (X.rows() < 1) throw std::invalid_argument("fit_linear: n >= 1 required");
  if (ridge < 0.0) throw std::invalid_argument("fit_linear: ridge must be >= 0");
  const int p = static_cast<int>(X.cols());
  if (ridge == 0.0) {
    detail::OlsSolution sol;
    try {
      sol = detail::ols_solve(X, y, /*want_contrasts=*/false);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(
          "fit_linear: singular normal equations; retry with ridge > 0");
    }
    return std::make_shared<LinearPredictor>(sol.beta, sol.intercept);
  }
  // Ridge with unpenalized intercept: center, solve, restore the intercept.
  Vector mx = X.colwise().mean();
  double my = y.mean();
  Matrix Xc = X.rowwise() - mx.transpose();
  Vector yc = y.array() - my;
  Matrix gram = Xc.transpose() * Xc + ridge * Matrix::Identity(p, p);
  Vector beta = gram.ldlt().solve(Xc.transpose() * yc);
  double intercept = my - beta.dot(mx);
  return std::make_shared<LinearPredictor>(std::move(beta), intercept);
}

PredictorPtr make_linear(const Vector& beta, double intercept) {
  return std::make_shared<LinearPredictor>(beta, intercept);
}

PredictorPtr fit_gbt(const Matrix& X, const Vector& y, const GbtConfig& config) {
  if (config.max_depth < 1 || config.n_trees < 1) {
    throw std::invalid_argument("fit_gbt: n_trees and max_depth must be >= 1");
  }
  if (config.min_leaf < 1) {
    throw std::invalid_argument("fit_gbt: min_leaf must be >= 1");
  }
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("fit_gbt: learning_rate must be > 0");
  }
  const int n = static_cast<int>(X.rows());
  if (n < 2 * config.min_leaf) {
    throw std::invalid_argument("fit_gbt: need n >= 2 * min_leaf rows");
  }

  double base = y.mean();
  Vector pred = Vector::Constant(n, base);
  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(config.n_trees));
  Rng rng(config.seed);

  std::vector<int> all_rows(static_cast<std::size_t>(n));
  std::iota(all_rows.begin(), all_rows.end(), 0);

  for (int t = 0; t < config.n_trees; ++t) {
    Vector residual = y - pred;
    std::vector<int> rows = all_rows;
    if (config.subsample < 1.0) {
      rng.shuffle(rows);
      int keep = std::max(2 * config.min_leaf,
                          static_cast<int>(config.subsample * n));
      rows.resize(static_cast<std::size_t>(std::min(keep, n)));
      std::sort(rows.begin(), rows.end());
    }
    TreeBuilder builder{X, residual, config.max_depth, config.min_leaf, {}};
    builder.build(rows, 0);
    for (int i = 0; i < n; ++i) {
      pred(i) += config.learning_rate * tree_predict(builder.tree, X.row(i));
    }
    trees.push_back(std::move(builder.tree));
  }
  return std::make_shared<GbtPredictor>(std::move(trees), base,
                                        config.learning_rate,
                                        static_cast<int>(X.cols()));
}

PredictorPtr external_predictor(const std::string& path, const Matrix& bound_X) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + path);
  std::map<int, double> predictions;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("predictions file: expected `row_index,prediction`");
    }
    std::string a = line.substr(0, comma);
    std::string b = line.substr(comma + 1);
    char* end = nullptr;
    long idx = std::strtol(a.c_str(), &end, 10);
    if (end == a.c_str()) {
      if (first) {
        first = false;  // header row
        continue;
      }
      throw std::runtime_error("predictions file: bad row index `" + a + "`");
    }
    first = false;
    double v = std::strtod(b.c_str(), &end);
    if (end == b.c_str() || !std::isfinite(v)) {
      throw std::runtime_error("predictions file: bad prediction `" + b + "`");
    }
    predictions[static_cast<int>(idx)] = v;
  }
  return std::make_shared<ExternalPredictor>(bound_X, std::move(predictions));
}

void write_predictions_csv(const std::string& path, const Vector& predictions) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write predictions file: " + path);
  out << "row_index,prediction\n";
  char buf[64];
  for (int i = 0; i < predictions.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", predictions(i));
    out << i << "," << buf << "\n";
  }
}

Vector predict_batch(const Predictor& f, const Matrix& X) {
  if (X.rows() > 0 && static_cast<int>(X.cols()) != f.feature_count()) {
    throw std::invalid_argument("predict_batch: column count does not match "
                                "the predictor's feature count");
  }
  Vector out(X.rows());
  for (int i = 0; i < X.rows(); ++i) out(i) = f.predict(X.row(i).transpose());
  return out;
}

void save_predictor(const Predictor& f, const std::string& path) {
  json doc;
  doc["phitest_model_version"] = 1;
  doc["kind"] = f.kind();
  if (const auto* lin = dynamic_cast<const LinearPredictor*>(&f)) {
    doc["intercept"] = lin->intercept();
    doc["beta"] = std::vector<double>(lin->beta().data(),
                                      lin->beta().data() + lin->beta().size());
  } else if (const auto* gbt = dynamic_cast<const GbtPredictor*>(&f)) {
    doc["base_score"] = gbt->base_score();
    doc["learning_rate"] = gbt->learning_rate();
    doc["feature_count"] = gbt->feature_count();
    json trees = json::array();
    for (const Tree& t : gbt->trees()) trees.push_back(tree_to_json(t));
    doc["trees"] = trees;
  } else {
    throw std::runtime_error("save_predictor: " + f.kind() +
                             " models are not serializable");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << doc.dump(2) << "\n";
}

PredictorPtr load_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json doc = json::parse(in);
  if (doc.at("phitest_model_version").get<int>() != 1) {
    throw std::runtime_error("unsupported model file version");
  }
  std::string kind = doc.at("kind").get<std::string>();
  if (kind == "linear") {
    std::vector<double> b = doc.at("beta").get<std::vector<double>>();
    Vector beta = Eigen::Map<Vector>(b.data(), static_cast<int>(b.size()));
    return std::make_shared<LinearPredictor>(beta,
                                             doc.at("intercept").get<double>());
  }
  if (kind == "gbt") {
    std::vector<Tree> trees;
    for (const auto& t : doc.at("trees")) trees.push_back(tree_from_json(t));
    return std::make_shared<GbtPredictor>(std::move(trees),
                                          doc.at("base_score").get<double>(),
                                          doc.at("learning_rate").get<double>(),
                                          doc.at("feature_count").get<int>());
  }
  throw std::runtime_error("unknown model kind in file: " + kind);
}

std::vector<double> gbt_training_curve(const Predictor& f, const Matrix& X,
                                       const Vector& y) {
  const auto* gbt = dynamic_cast<const GbtPredictor*>(&f);
  if (gbt == nullptr) {
    throw std::invalid_argument("gbt_training_curve: not a gbt model");
  }
  const int n = static_cast<int>(X.rows());
  Vector pred = Vector::Constant(n, gbt->base_score());
  std::vector<double> curve;
  curve.push_back((y - pred).squaredNorm() / n);
  for (const Tree& t : gbt->trees()) {
    for (int i = 0; i < n; ++i) {
      pred(i) += gbt->learning_rate() * tree_predict(t, X.row(i));
    }
    curve.push_back((y - pred).squaredNorm() / n);
  }
  return curve;
}

}  // namespace phitest
