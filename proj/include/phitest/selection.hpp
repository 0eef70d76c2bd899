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

#ifndef PHITEST_SELECTION_HPP
#define PHITEST_SELECTION_HPP

#include <vector>

#include "phitest/dataset.hpp"

namespace phitest {

enum class SelectorKind { kLarsK, kLassoLambda, kStepwiseK };

// Output of a surrogate selection procedure. Columns are centered and scaled
// internally; refit coefficients are reported on the original scale. For the
// full-sample procedures (lasso at fixed lambda, forward stepwise) the
// selection event is encoded as the polyhedron {y : A y <= b} in the raw
// response space (centering folded into the rows of A).
struct SelectionOutcome {
  SelectorKind method = SelectorKind::kLarsK;
  std::vector<int> selected;  // in entry/support order, indices into X's columns
  std::vector<int> signs;     // +-1 per selected feature
  Vector beta_hat;            // OLS refit slopes aligned with `selected`
  double intercept = 0.0;
  double sigma2_hat = 0.0;
  Vector se;                  // refit standard errors per slope
  Matrix A;                   // m x n (empty for lars_first_k)
  Vector b;                   // length m
  Matrix contrasts;           // |S| x n; row k applied to y gives beta_hat(k)
  Vector solver_beta;         // lasso only: penalized coefficients on the
                              // standardized scale, aligned with `selected`
  std::vector<double> entry_lambdas;  // lars: correlation level at each entry
  bool path_truncated = false;
  bool tie_broken = false;
};

// LARS path with the lasso modification; the selected set is the first K
// distinct variables to enter. Carries no polyhedron (split-sample use only).
SelectionOutcome lars_first_k(const Matrix& X, const Vector& y, int K,
                              bool standardize = true);

// Lasso at a fixed penalty, solved by coordinate descent on standardized
// columns; the polyhedron conditions on the active set and its sign pattern.
SelectionOutcome lasso_fixed_lambda(const Matrix& X, const Vector& y,
                                    double lambda);

// Forward stepwise with the fixed entry rule argmax_j |x_j^T r| over
// standardized columns; the polyhedron encodes every step's comparisons.
SelectionOutcome stepwise_first_k(const Matrix& X, const Vector& y, int K);

// Intercept-augmented OLS refit. `contrasts` rows reproduce the slopes
// exactly: contrasts.row(j) * y == beta(j).
struct RefitResult {
  Vector beta;
  double intercept = 0.0;
  double sigma2 = 0.0;
  Vector se;
  Matrix contrasts;
};

RefitResult refit_ols(const Matrix& X_S, const Vector& y);

}  // namespace phitest

#endif  // PHITEST_SELECTION_HPP
