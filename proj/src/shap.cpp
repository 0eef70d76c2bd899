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

#include "phitest/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "phitest/rng.hpp"

namespace phitest {

namespace {

constexpr int kMaxExactFeatures = 20;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r *= static_cast<double>(n - i + 1) / static_cast<double>(i);
  }
  return r;
}

// Mean prediction over background rows with coalition features taken from x.
double coalition_value(const Predictor& f, const Vector& x, const Matrix& bg,
                       std::uint32_t mask) {
  const int p = static_cast<int>(x.size());
  const int B = static_cast<int>(bg.rows());
  Vector z(p);
  double sum = 0.0;
  for (int b = 0; b < B; ++b) {
    for (int j = 0; j < p; ++j) {
      z(j) = (mask >> j) & 1u ? x(j) : bg(b, j);
    }
    sum += f.predict(z);
  }
  return sum / B;
}

// Values of every coalition for one evaluation row: 2^p entries.
std::vector<double> all_coalition_values(const Predictor& f, const Vector& x,
                                         const Matrix& bg) {
  const int p = static_cast<int>(x.size());
  const std::uint32_t n_masks = 1u << p;
  std::vector<double> vals(n_masks);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
    vals[mask] = coalition_value(f, x, bg, mask);
  }
  return vals;
}

}  // namespace

Background make_background(const Predictor& f, const Matrix& rows) {
  if (rows.rows() < 1) {
    throw std::invalid_argument("background needs at least one row");
  }
  Background bg;
  bg.rows = rows;
  bg.base_value = predict_batch(f, rows).mean();
  return bg;
}

Vector global_scores(const Matrix& phi) {
  if (phi.rows() < 1) {
    throw std::invalid_argument("global_scores: need at least one row");
  }
  return phi.cwiseAbs().colwise().mean();
}

ShapMatrix exact_shap(const Predictor& f, const Matrix& X_eval,
                      const Background& bg) {
  const int p = static_cast<int>(X_eval.cols());
  if (p > kMaxExactFeatures) {
    throw std::invalid_argument(
        "exact_shap enumerates 2^p coalitions and is limited to p <= 20; "
        "use kernel_shap instead");
  }
  const int n = static_cast<int>(X_eval.rows());

  // Shapley weight for a coalition of size s among p-1 other players:
  // s! (p-s-1)! / p! = 1 / (p * C(p-1, s)).
  std::vector<double> weight(static_cast<std::size_t>(p));
  for (int s = 0; s < p; ++s) {
    weight[static_cast<std::size_t>(s)] = 1.0 / (p * binomial(p - 1, s));
  }

  ShapMatrix out;
  out.engine = "exact";
  out.base_value = bg.base_value;
  out.phi.resize(n, p);

  for (int i = 0; i < n; ++i) {
    Vector x = X_eval.row(i).transpose();
    std::vector<double> vals = all_coalition_values(f, x, bg.rows);
    for (int j = 0; j < p; ++j) {
      const std::uint32_t bit = 1u << j;
      double phi = 0.0;
      const std::uint32_t n_masks = 1u << p;
      for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
        if (mask & bit) continue;
        int s = std::popcount(mask);
        phi += weight[static_cast<std::size_t>(s)] *
               (vals[mask | bit] - vals[mask]);
      }
      out.phi(i, j) = phi;
    }
  }
  out.global_scores = global_scores(out.phi);
  return out;
}

ShapMatrix kernel_shap(const Predictor& f, const Matrix& X_eval,
                       const Background& bg, const KernelShapConfig& config) {
  const int p = static_cast<int>(X_eval.cols());
  const int n = static_cast<int>(X_eval.rows());
  if (config.ridge_eps < 0.0) {
    throw std::invalid_argument("kernel_shap: ridge_eps must be >= 0");
  }

  ShapMatrix out;
  out.engine = "kernel";
  out.base_value = bg.base_value;
  out.phi.resize(n, p);

  if (p == 1) {
    for (int i = 0; i < n; ++i) {
      Vector x = X_eval.row(i).transpose();
      out.phi(i, 0) = f.predict(x) - bg.base_value;
    }
    out.global_scores = global_scores(out.phi);
    return out;
  }

  // Shapley kernel weight of one coalition of size s.
  auto kernel_weight = [p](int s) {
    return (p - 1.0) / (binomial(p, s) * s * (p - s));
  };

  // Choose the coalition masks and their least-squares weights once; the
  // same design is reused for every evaluation row.
  std::map<std::uint32_t, double> mask_weight;
  const std::uint32_t full = (1u << p) - 1u;
  bool enumerate_all =
      config.n_coalitions <= 0 ||
      static_cast<long long>(config.n_coalitions) >= (1LL << p) - 2;
  if (enumerate_all) {
    if (p > kMaxExactFeatures) {
      throw std::invalid_argument(
          "kernel_shap with all coalitions is limited to p <= 20");
    }
    for (std::uint32_t mask = 1; mask < full; ++mask) {
      mask_weight[mask] = kernel_weight(std::popcount(mask));
    }
  } else {
    if (config.n_coalitions < p + 2) {
      throw std::invalid_argument(
          "kernel_shap: sampled mode needs n_coalitions >= p + 2");
    }
    // Mass of each complementary size pair {s, p-s}.
    std::vector<double> pair_mass;
    std::vector<int> pair_size;
    for (int s = 1; s <= p / 2; ++s) {
      double mass = kernel_weight(s) * binomial(p, s);
      if (s != p - s) mass *= 2.0;
      pair_size.push_back(s);
      pair_mass.push_back(mass);
    }
    double total_mass =
        std::accumulate(pair_mass.begin(), pair_mass.end(), 0.0);

    Rng rng(config.seed);
    int budget = config.n_coalitions;
    std::vector<int> feature_ids(static_cast<std::size_t>(p));
    std::iota(feature_ids.begin(), feature_ids.end(), 0);

    for (std::size_t k = 0; k < pair_size.size() && budget > 0; ++k) {
      int s = pair_size[k];
      bool self_paired = (s == p - s);
      int draw_cost = self_paired ? 1 : 2;
      int n_draws = std::max(
          1, static_cast<int>(std::lround(config.n_coalitions *
                                          pair_mass[k] / total_mass)) /
                 draw_cost);
      double per_draw = pair_mass[k] / (n_draws * draw_cost);
      for (int d = 0; d < n_draws && budget > 0; ++d) {
        rng.shuffle(feature_ids);
        std::uint32_t mask = 0;
        for (int j = 0; j < s; ++j) {
          mask |= 1u << feature_ids[static_cast<std::size_t>(j)];
        }
        mask_weight[mask] += per_draw;
        budget -= 1;
        if (!self_paired && budget > 0) {
          mask_weight[full & ~mask] += per_draw;
          budget -= 1;
        }
      }
    }
    int first_size = std::popcount(mask_weight.begin()->first);
    bool all_same = std::all_of(
        mask_weight.begin(), mask_weight.end(), [&](const auto& kv) {
          return std::popcount(kv.first) == first_size;
        });
    if (all_same) {
      throw std::runtime_error(
          "kernel_shap: degenerate coalition sample (all of one size)");
    }
  }

  // Weighted least squares with the efficiency constraint eliminated:
  // phi_p = delta - sum_{j<p} phi_j.
  const int q = p - 1;
  Matrix gram = Matrix::Zero(q, q);
  std::vector<Vector> design;
  design.reserve(mask_weight.size());
  Vector weights(static_cast<int>(mask_weight.size()));
  std::vector<std::uint32_t> masks;
  masks.reserve(mask_weight.size());
  {
    int k = 0;
    for (const auto& [mask, w] : mask_weight) {
      Vector u(q);
      double zp = (mask >> (p - 1)) & 1u ? 1.0 : 0.0;
      for (int j = 0; j < q; ++j) {
        double zj = (mask >> j) & 1u ? 1.0 : 0.0;
        u(j) = zj - zp;
      }
      gram.noalias() += w * (u * u.transpose());
      design.push_back(std::move(u));
      weights(k++) = w;
      masks.push_back(mask);
    }
  }
  if (config.ridge_eps > 0.0) {
    gram.diagonal().array() += config.ridge_eps;
  }
  Eigen::LDLT<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("kernel_shap: weighted least squares failed; "
                             "try ridge_eps > 0");
  }

  for (int i = 0; i < n; ++i) {
    Vector x = X_eval.row(i).transpose();
    double fx = f.predict(x);
    double delta = fx - bg.base_value;
    Vector rhs = Vector::Zero(q);
    for (std::size_t k = 0; k < masks.size(); ++k) {
      double g = coalition_value(f, x, bg.rows, masks[k]);
      double zp = (masks[k] >> (p - 1)) & 1u ? 1.0 : 0.0;
      double r = g - bg.base_value - zp * delta;
      rhs.noalias() += weights(static_cast<int>(k)) * r *
                       design[k];
    }
    Vector head = solver.solve(rhs);
    out.phi.row(i).head(q) = head.transpose();
    out.phi(i, p - 1) = delta - head.sum();
  }
  out.global_scores = global_scores(out.phi);
  return out;
}

std::vector<int> top_m(const Vector& scores, int M) {
  const int p = static_cast<int>(scores.size());
  if (M < 1 || M > p) {
    throw std::invalid_argument("top_m: M must lie in [1, p]");
  }
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  order.resize(static_cast<std::size_t>(M));
  return order;
}

std::string shap_to_csv(const ShapMatrix& shap,
                        const std::vector<std::string>& feature_names) {
  std::ostringstream out;
  for (const auto& name : feature_names) out << name << ",";
  out << "base_value\n";
  char buf[64];
  for (int i = 0; i < shap.phi.rows(); ++i) {
    for (int j = 0; j < shap.phi.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", shap.phi(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", shap.base_value);
    out << buf << "\n";
  }
  return out.str();
}

}  // namespace phitest
