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

#ifndef PHITEST_PREDICTOR_HPP
#define PHITEST_PREDICTOR_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "phitest/dataset.hpp"

namespace phitest {

// The black box under explanation: a deterministic map from a feature vector
// of fixed length to a real prediction.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual double predict(const Vector& x) const = 0;
  virtual int feature_count() const = 0;
  virtual std::string kind() const = 0;
};

using PredictorPtr = std::shared_ptr<const Predictor>;

// Ridge-regularized least squares (intercept unpenalized). ridge = 0 gives
// plain OLS; a singular system with ridge = 0 is an error.
PredictorPtr fit_linear(const Matrix& X, const Vector& y, double ridge = 0.0);

// Direct construction of a linear predictor from known coefficients.
PredictorPtr make_linear(const Vector& beta, double intercept);

struct GbtConfig {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 5;
  double subsample = 1.0;  // row fraction per tree; 1.0 disables sampling
  std::uint64_t seed = 0;
};

// Gradient-boosted regression trees with exact greedy variance-reduction
// splits over sorted unique values.
PredictorPtr fit_gbt(const Matrix& X, const Vector& y, const GbtConfig& config);

// Adapter for predictions computed outside the process. The file is a
// two-column CSV `row_index,prediction`; the adapter is bound to the rows of
// `bound_X` and refuses any query vector outside that set.
PredictorPtr external_predictor(const std::string& path, const Matrix& bound_X);

// Writes predictions in the external-adapter CSV format.
void write_predictions_csv(const std::string& path, const Vector& predictions);

// Elementwise application of the predictor over rows of X.
Vector predict_batch(const Predictor& f, const Matrix& X);

// Versioned textual model format (JSON). External adapters are not
// serializable.
void save_predictor(const Predictor& f, const std::string& path);
PredictorPtr load_predictor(const std::string& path);

// Per-round training mean squared error of a boosted model (diagnostics).
std::vector<double> gbt_training_curve(const Predictor& f, const Matrix& X,
                                       const Vector& y);

}  // namespace phitest

#endif  // PHITEST_PREDICTOR_HPP
