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

#ifndef PHITEST_DATASET_HPP
#define PHITEST_DATASET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace phitest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A loaded regression dataset: n rows, p named feature columns, one target.
// All entries are finite; feature names are unique.
struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix X;
  Vector y;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
};

enum class Recipe { kNone, kAirQuality, kConcrete };

Recipe parse_recipe(const std::string& name);
std::string recipe_name(Recipe r);

// Loads a comma-separated file with a header row. `target_column` may be
// empty when the recipe implies a target (airquality -> CO(GT), concrete ->
// the compressive-strength column).
Dataset load_csv(const std::string& path, const std::string& target_column,
                 Recipe recipe);

// Writes a dataset back out with full precision; reloading with recipe none
// reproduces the matrix exactly.
void write_csv(const Dataset& data, const std::string& path);

// Train/test row split, with an optional further partition of the training
// rows into a selection half and an inference half.
struct SplitPlan {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::vector<int> train_idx;
  std::vector<int> test_idx;
  std::vector<int> selection_idx;  // empty unless split-sample is enabled
  std::vector<int> inference_idx;
};

SplitPlan make_split(int n, std::uint64_t seed, double train_fraction,
                     bool split_sample);

// Per-column centering and scaling by the population standard deviation.
// Constant columns keep scale 1 and are recorded in `constant_columns`.
struct Standardizer {
  Vector means;
  Vector scales;
  std::vector<int> constant_columns;

  Matrix apply(const Matrix& X) const;
  Matrix invert(const Matrix& Z) const;
};

Standardizer fit_standardizer(const Matrix& X);

// Gaussian design with linear signal: X ~ N(0, I), y = X beta + sigma * eps.
Dataset synth_gaussian(int n, int p, const Vector& beta, double sigma,
                       std::uint64_t seed);

// Row-subset helpers used throughout the pipeline.
Matrix take_rows(const Matrix& X, std::span<const int> idx);
Vector take_rows(const Vector& v, std::span<const int> idx);
Matrix take_cols(const Matrix& X, std::span<const int> idx);

}  // namespace phitest

#endif  // PHITEST_DATASET_HPP
