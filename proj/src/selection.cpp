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

#include "phitest/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ols_util.hpp"

namespace phitest {

namespace {

constexpr double kPathTol = 1e-12;

struct ScaledDesign {
  Matrix Z;       // centered (and possibly scaled) columns
  Vector means;
  Vector scales;  // all ones when standardize = false
};

ScaledDesign center_and_scale(const Matrix& X, bool standardize) {
  ScaledDesign d;
  const int p = static_cast<int>(X.cols());
  d.means = X.colwise().mean();
  d.scales = Vector::Ones(p);
  d.Z = X.rowwise() - d.means.transpose();
  if (standardize) {
    for (int j = 0; j < p; ++j) {
      double sd = std::sqrt(d.Z.col(j).squaredNorm() / X.rows());
      if (sd > 0.0) {
        d.scales(j) = sd;
        d.Z.col(j) /= sd;
      }
    }
  }
  return d;
}

// Post-multiplies each row functional by the centering map I - 11^T/n so the
// rows act on the raw response.
Matrix compose_with_centering(const Matrix& rows) {
  const int n = static_cast<int>(rows.cols());
  Vector row_means = rows.rowwise().mean();
  return rows - row_means * Eigen::RowVectorXd::Ones(n);
}

void fill_refit(SelectionOutcome* out, const Matrix& X, const Vector& y) {
  Matrix X_S = take_cols(X, out->selected);
  RefitResult refit = refit_ols(X_S, y);
  out->beta_hat = refit.beta;
  out->intercept = refit.intercept;
  out->sigma2_hat = refit.sigma2;
  out->se = refit.se;
  out->contrasts = refit.contrasts;
}

void check_event_holds(const SelectionOutcome& out, const Vector& y) {
  if (out.A.rows() == 0) return;
  double worst = (out.A * y - out.b).maxCoeff();
  if (worst > 1e-9) {
    throw std::runtime_error(
        "selection event violated by the observed response (slack " +
        std::to_string(worst) + ")");
  }
}

}  // namespace

RefitResult refit_ols(const Matrix& X_S, const Vector& y) {
  detail::OlsSolution sol = detail::ols_solve(X_S, y, /*want_contrasts=*/true);
  RefitResult out;
  out.beta = sol.beta;
  out.intercept = sol.intercept;
  out.sigma2 = sol.sigma2;
  out.se = sol.se;
  out.contrasts = sol.contrasts;
  return out;
}

SelectionOutcome lars_first_k(const Matrix& X, const Vector& y, int K,
                              bool standardize) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (K < 1 || K > std::min(p, n - 2)) {
    throw std::invalid_argument("lars_first_k: K must lie in [1, min(p, n-2)]");
  }

  ScaledDesign d = center_and_scale(X, standardize);
  Vector yc = y.array() - y.mean();

  SelectionOutcome out;
  out.method = SelectorKind::kLarsK;

  std::vector<int> active;
  std::vector<char> is_active(static_cast<std::size_t>(p), 0);
  std::vector<char> ever_entered(static_cast<std::size_t>(p), 0);
  Vector beta = Vector::Zero(p);
  Vector r = yc;
  Vector c = d.Z.transpose() * r;

  int distinct_entries = 0;
  const double c0 = c.cwiseAbs().maxCoeff();
  if (c0 < kPathTol) {
    throw std::runtime_error("lars_first_k: response is orthogonal to every "
                             "column (degenerate path)");
  }

  auto record_entry = [&](int j, double level) {
    active.push_back(j);
    is_active[static_cast<std::size_t>(j)] = 1;
    if (!ever_entered[static_cast<std::size_t>(j)]) {
      ever_entered[static_cast<std::size_t>(j)] = 1;
      out.selected.push_back(j);
      out.signs.push_back(c(j) >= 0.0 ? 1 : -1);
      out.entry_lambdas.push_back(level);
      ++distinct_entries;
    }
  };

  // First variable: largest absolute correlation, ties by index.
  {
    int j0 = 0;
    double best = -1.0;
    for (int j = 0; j < p; ++j) {
      if (std::fabs(c(j)) > best + kPathTol) {
        best = std::fabs(c(j));
        j0 = j;
      }
    }
    record_entry(j0, best);
  }

  int max_active = std::min(p, n - 2);
  for (int iter = 0; iter < 64 * p + 64; ++iter) {
    if (distinct_entries >= K) break;
    double C = 0.0;
    for (int j : active) C = std::max(C, std::fabs(c(j)));
    if (C < kPathTol * std::max(1.0, c0)) {
      out.path_truncated = true;
      break;
    }

    // Direction with unit correlation decay on the active set.
    const int a = static_cast<int>(active.size());
    Matrix Za(n, a);
    Vector s(a);
    for (int k = 0; k < a; ++k) {
      Za.col(k) = d.Z.col(active[static_cast<std::size_t>(k)]);
      s(k) = c(active[static_cast<std::size_t>(k)]) >= 0.0 ? 1.0 : -1.0;
    }
    Eigen::LDLT<Matrix> gram((Za.transpose() * Za).eval());
    Vector dir = gram.solve(s);
    Vector u = Za * dir;
    Vector advance = d.Z.transpose() * u;  // correlation decay rates

    double gamma = C;  // full step drives active correlations to zero
    int join_j = -1;
    for (int j = 0; j < p; ++j) {
      if (is_active[static_cast<std::size_t>(j)]) continue;
      for (double cand : {(C - c(j)) / (1.0 - advance(j)),
                          (C + c(j)) / (1.0 + advance(j))}) {
        if (cand > kPathTol && cand < gamma - kPathTol) {
          gamma = cand;
          join_j = j;
        } else if (cand > kPathTol && cand < gamma + kPathTol && join_j >= 0 &&
                   j < join_j) {
          join_j = j;  // tie at the same step: lowest index enters
        }
      }
    }

    // Lasso modification: an active coefficient crossing zero leaves first.
    double drop_gamma = std::numeric_limits<double>::infinity();
    int drop_k = -1;
    for (int k = 0; k < a; ++k) {
      int j = active[static_cast<std::size_t>(k)];
      if (std::fabs(dir(k)) < kPathTol) continue;
      double g = -beta(j) / dir(k);
      if (g > kPathTol && g < drop_gamma - kPathTol) {
        drop_gamma = g;
        drop_k = k;
      }
    }

    bool drop = drop_k >= 0 && drop_gamma < gamma - kPathTol;
    double step = drop ? drop_gamma : gamma;
    for (int k = 0; k < a; ++k) beta(active[static_cast<std::size_t>(k)]) += step * dir(k);
    r -= step * u;
    c -= step * advance;

    if (drop) {
      int j = active[static_cast<std::size_t>(drop_k)];
      beta(j) = 0.0;
      active.erase(active.begin() + drop_k);
      is_active[static_cast<std::size_t>(j)] = 0;
      continue;
    }
    if (join_j < 0) {
      out.path_truncated = true;  // path exhausted before K entries
      break;
    }
    if (static_cast<int>(active.size()) >= max_active) {
      out.path_truncated = true;
      break;
    }
    record_entry(join_j, C - step);
  }
  if (distinct_entries < K) out.path_truncated = true;

  fill_refit(&out, X, y);
  return out;
}

SelectionOutcome lasso_fixed_lambda(const Matrix& X, const Vector& y,
                                    double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("lasso_fixed_lambda: lambda must be > 0");
  }
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());

  ScaledDesign d = center_and_scale(X, /*standardize=*/true);
  Vector yc = y.array() - y.mean();

  // Coordinate descent for 0.5 ||yc - Z beta||^2 + lambda ||beta||_1.
  Vector beta = Vector::Zero(p);
  Vector col_sq(p);
  for (int j = 0; j < p; ++j) col_sq(j) = d.Z.col(j).squaredNorm();
  Vector r = yc;
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double max_delta = 0.0;
    for (int j = 0; j < p; ++j) {
      if (col_sq(j) <= 0.0) continue;
      double rho = d.Z.col(j).dot(r) + col_sq(j) * beta(j);
      double bj = 0.0;
      if (rho > lambda) {
        bj = (rho - lambda) / col_sq(j);
      } else if (rho < -lambda) {
        bj = (rho + lambda) / col_sq(j);
      }
      double delta = bj - beta(j);
      if (delta != 0.0) {
        r -= delta * d.Z.col(j);
        beta(j) = bj;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    if (max_delta < 1e-13 * (1.0 + beta.cwiseAbs().maxCoeff())) break;
  }

  // KKT verification.
  Vector grad = d.Z.transpose() * r;
  for (int j = 0; j < p; ++j) {
    if (beta(j) != 0.0) {
      double target = lambda * (beta(j) > 0.0 ? 1.0 : -1.0);
      if (std::fabs(grad(j) - target) > 1e-6 * std::max(1.0, lambda)) {
        throw std::runtime_error("lasso_fixed_lambda: KKT check failed "
                                 "(coordinate descent did not converge)");
      }
    } else if (std::fabs(grad(j)) > lambda * (1.0 + 1e-6)) {
      throw std::runtime_error("lasso_fixed_lambda: KKT check failed "
                               "(coordinate descent did not converge)");
    }
  }

  SelectionOutcome out;
  out.method = SelectorKind::kLassoLambda;
  for (int j = 0; j < p; ++j) {
    if (beta(j) != 0.0) {
      out.selected.push_back(j);
      out.signs.push_back(beta(j) > 0.0 ? 1 : -1);
    }
  }
  out.solver_beta.resize(static_cast<int>(out.selected.size()));
  for (std::size_t i = 0; i < out.selected.size(); ++i) {
    out.solver_beta(static_cast<int>(i)) = beta(out.selected[i]);
  }

  // Polyhedron conditioning on (support, signs), built on the standardized
  // design and composed with centering so rows act on the raw response.
  const int k = static_cast<int>(out.selected.size());
  std::vector<int> inactive;
  for (int j = 0; j < p; ++j) {
    if (beta(j) == 0.0) inactive.push_back(j);
  }
  const int m = static_cast<int>(inactive.size());
  Matrix rows(k + 2 * m, n);
  Vector rhs(k + 2 * m);
  if (k > 0) {
    Matrix Zs = take_cols(d.Z, out.selected);
    Vector s(k);
    for (int i = 0; i < k; ++i) s(i) = out.signs[static_cast<std::size_t>(i)];
    Matrix gram_inv =
        (Zs.transpose() * Zs).ldlt().solve(Matrix::Identity(k, k));
    Matrix pinv_t = gram_inv * Zs.transpose();  // (Zs^T Zs)^{-1} Zs^T
    // Active-sign rows: -diag(s) (Zs^T Zs)^{-1} Zs^T y <= -lambda diag(s) gram_inv s.
    rows.topRows(k) = (-s).asDiagonal() * pinv_t;
    rhs.head(k) = -lambda * (s.asDiagonal() * (gram_inv * s));
    if (m > 0) {
      Matrix Zn = take_cols(d.Z, inactive);
      // Zn^T (I - P_S) without forming the n x n projector.
      Matrix resid_rows =
          (Zn.transpose() - (Zn.transpose() * Zs) * pinv_t) / lambda;
      Vector offset = Zn.transpose() * (Zs * (gram_inv * s));
      rows.middleRows(k, m) = resid_rows;
      rhs.segment(k, m) = Vector::Ones(m) - offset;
      rows.bottomRows(m) = -resid_rows;
      rhs.tail(m) = Vector::Ones(m) + offset;
    }
  } else {
    Matrix Zn = take_cols(d.Z, inactive);
    rows.topRows(m) = Zn.transpose() / lambda;
    rhs.head(m) = Vector::Ones(m);
    rows.bottomRows(m) = -Zn.transpose() / lambda;
    rhs.tail(m) = Vector::Ones(m);
  }
  out.A = compose_with_centering(rows);
  out.b = rhs;

  fill_refit(&out, X, y);
  check_event_holds(out, y);
  return out;
}

SelectionOutcome stepwise_first_k(const Matrix& X, const Vector& y, int K) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (K < 1 || K > std::min(p, n - 2)) {
    throw std::invalid_argument(
        "stepwise_first_k: K must lie in [1, min(p, n-2)]");
  }

  ScaledDesign d = center_and_scale(X, /*standardize=*/true);

  SelectionOutcome out;
  out.method = SelectorKind::kStepwiseK;

  // Orthonormal basis of the current fit span, starting with the intercept.
  Matrix Q(n, K + 1);
  Q.col(0) = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  int q_cols = 1;

  std::vector<char> used(static_cast<std::size_t>(p), 0);
  std::vector<Eigen::RowVectorXd> event_rows;

  for (int step = 0; step < K; ++step) {
    // Residualized column functionals z_j = (I - QQ^T) x_j.
    Matrix Zr = d.Z - Q.leftCols(q_cols) *
                          (Q.leftCols(q_cols).transpose() * d.Z);
    Vector vals = Zr.transpose() * y;

    int winner = -1;
    double best = -1.0;
    for (int j = 0; j < p; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      double v = std::fabs(vals(j));
      if (v > best + 1e-12) {
        best = v;
        winner = j;
      } else if (v > best - 1e-12 && winner >= 0 && j > winner) {
        out.tie_broken = true;  // equal scores resolve to the lower index
      }
    }
    if (winner < 0) break;
    if (best < 1e-12) {
      if (step == 0) {
        throw std::runtime_error("stepwise_first_k: response is orthogonal "
                                 "to every column (degenerate path)");
      }
      out.path_truncated = true;
      break;
    }

    double sign = vals(winner) >= 0.0 ? 1.0 : -1.0;
    out.selected.push_back(winner);
    out.signs.push_back(static_cast<int>(sign));
    used[static_cast<std::size_t>(winner)] = 1;

    // Event rows: the winner beats every remaining competitor in absolute
    // value, and its own sign is fixed.
    Eigen::RowVectorXd zw = sign * Zr.col(winner).transpose();
    for (int j = 0; j < p; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      event_rows.push_back(Zr.col(j).transpose() - zw);
      event_rows.push_back(-Zr.col(j).transpose() - zw);
    }
    event_rows.push_back(-zw);

    // Extend the basis with the winner's residualized direction.
    Vector qnew = Zr.col(winner);
    double norm = qnew.norm();
    if (norm < 1e-12) {
      out.path_truncated = true;
      break;
    }
    Q.col(q_cols) = qnew / norm;
    ++q_cols;
  }

  out.A.resize(static_cast<int>(event_rows.size()), n);
  for (std::size_t i = 0; i < event_rows.size(); ++i) {
    out.A.row(static_cast<int>(i)) = event_rows[i];
  }
  out.b = Vector::Zero(out.A.rows());

  fill_refit(&out, X, y);
  check_event_holds(out, y);
  return out;
}

}  // namespace phitest
