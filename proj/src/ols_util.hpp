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

#ifndef PHITEST_SRC_OLS_UTIL_HPP
#define PHITEST_SRC_OLS_UTIL_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "phitest/dataset.hpp"

namespace phitest {
namespace detail {

struct OlsSolution {
  Vector beta;       // slope coefficients, no intercept entry
  double intercept = 0.0;
  double sigma2 = 0.0;  // ||residual||^2 / (n - p - 1)
  double dof = 0.0;
  Vector se;         // standard errors of the slopes
  Matrix contrasts;  // p x n; row j applied to y reproduces beta(j)
  Vector fitted;
};

// Intercept-augmented least squares. Throws on rank deficiency, naming the
// offending columns.
inline OlsSolution ols_solve(const Matrix& X, const Vector& y,
                             bool want_contrasts = true) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n != static_cast<int>(y.size())) {
    throw std::invalid_argument("ols_solve: X and y row counts differ");
  }
  Matrix A(n, p + 1);
  A.col(0) = Vector::Ones(n);
  if (p > 0) A.rightCols(p) = X;

  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) {
    std::string msg = "rank-deficient design; collinear columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (int k = qr.rank(); k < p + 1; ++k) {
      int col = perm(k);
      msg += col == 0 ? " intercept" : " " + std::to_string(col - 1);
    }
    throw std::runtime_error(msg);
  }

  OlsSolution out;
  Vector coef = qr.solve(y);
  out.intercept = coef(0);
  out.beta = coef.tail(p);
  out.fitted = A * coef;
  double rss = (y - out.fitted).squaredNorm();
  out.dof = static_cast<double>(n - p - 1);
  out.sigma2 = out.dof > 0 ? rss / out.dof : 0.0;

  Matrix gram_inv = (A.transpose() * A).ldlt().solve(Matrix::Identity(p + 1, p + 1));
  out.se.resize(p);
  for (int j = 0; j < p; ++j) {
    out.se(j) = std::sqrt(std::max(0.0, out.sigma2 * gram_inv(j + 1, j + 1)));
  }
  if (want_contrasts) {
    Matrix all = gram_inv * A.transpose();  // (p+1) x n
    out.contrasts = all.bottomRows(p);
  }
  return out;
}

// Coefficient of determination on a given sample.
inline double r_squared(const Vector& y, const Vector& pred) {
  double mean = y.mean();
  double ss_tot = (y.array() - mean).square().sum();
  double ss_res = (y - pred).squaredNorm();
  if (ss_tot <= 0.0) return 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace detail
}  // namespace phitest

#endif  // PHITEST_SRC_OLS_UTIL_HPP
