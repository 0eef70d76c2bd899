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

#ifndef PHITEST_SHAP_HPP
#define PHITEST_SHAP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "phitest/dataset.hpp"
#include "phitest/predictor.hpp"

namespace phitest {

// Reference sample defining the interventional value function: a coalition's
// value is the mean prediction over background rows spliced outside it.
struct Background {
  Matrix rows;
  double base_value = 0.0;
};

Background make_background(const Predictor& f, const Matrix& rows);

// Per-sample attributions plus their global mean-absolute aggregation.
struct ShapMatrix {
  Matrix phi;  // n x p
  double base_value = 0.0;
  std::string engine;  // "exact" or "kernel"
  Vector global_scores;
};

// Exact Shapley values by subset enumeration (interventional value function).
// Bounded to p <= 20.
ShapMatrix exact_shap(const Predictor& f, const Matrix& X_eval,
                      const Background& bg);

struct KernelShapConfig {
  int n_coalitions = 0;  // 0 => enumerate all 2^p - 2 non-trivial coalitions
  double ridge_eps = 0.0;
  std::uint64_t seed = 0;
};

// KernelSHAP: Shapley-kernel weighted least squares over coalitions with the
// efficiency constraint eliminated exactly. Coalition sampling is stratified
// by size (proportional to kernel weight mass) with paired complements.
ShapMatrix kernel_shap(const Predictor& f, const Matrix& X_eval,
                       const Background& bg, const KernelShapConfig& config);

// Mean absolute attribution per column.
Vector global_scores(const Matrix& phi);

// Indices of the M largest scores, descending; ties broken by ascending
// feature index.
std::vector<int> top_m(const Vector& scores, int M);

// CSV dump: header of feature names plus base_value, one row per sample.
std::string shap_to_csv(const ShapMatrix& shap,
                        const std::vector<std::string>& feature_names);

}  // namespace phitest

#endif  // PHITEST_SHAP_HPP
