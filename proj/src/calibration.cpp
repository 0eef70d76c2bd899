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

#include "phitest/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phitest/rng.hpp"
#include "phitest/selinf.hpp"

namespace phitest {

namespace {

struct Replicate {
  Matrix X;
  Vector y;
  Vector mu;  // E[y]
};

Replicate draw_replicate(const CalibrationConfig& cfg, std::uint64_t seed) {
  Replicate rep;
  Rng rng(seed);
  rep.X.resize(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.p; ++j) rep.X(i, j) = rng.normal();
  }
  if (cfg.beta.size() > 0) {
    if (static_cast<int>(cfg.beta.size()) != cfg.p) {
      throw std::invalid_argument("calibration: |beta| must equal p");
    }
    rep.mu = rep.X * cfg.beta;
  } else {
    rep.mu = Vector::Zero(cfg.n);
  }
  rep.y = rep.mu;
  for (int i = 0; i < cfg.n; ++i) rep.y(i) += cfg.sigma * rng.normal();
  return rep;
}

SelectionOutcome select(const CalibrationConfig& cfg, const Matrix& X,
                        const Vector& y) {
  if (cfg.selector == SelectorKind::kLassoLambda) {
    return lasso_fixed_lambda(X, y, cfg.lasso_lambda);
  }
  return stepwise_first_k(X, y, cfg.K);
}

double effective_sigma(const CalibrationConfig& cfg,
                       const SelectionOutcome& sel) {
  return cfg.known_sigma ? cfg.sigma : std::sqrt(sel.sigma2_hat);
}

}  // namespace

NullCalibrationResult calibrate_null_p(const CalibrationConfig& cfg) {
  NullCalibrationResult out;
  out.levels = cfg.levels;
  std::vector<double> pvals;
  pvals.reserve(static_cast<std::size_t>(cfg.replicates));

  for (int r = 0; r < cfg.replicates; ++r) {
    Replicate rep = draw_replicate(cfg, Rng::derive(cfg.seed, static_cast<std::uint64_t>(r)));
    SelectionOutcome sel = select(cfg, rep.X, rep.y);
    if (sel.selected.empty()) continue;
    double sigma = effective_sigma(cfg, sel);
    Vector v = sel.contrasts.row(0).transpose();
    double t_obs = v.dot(rep.y);
    double tau = sigma * v.norm();
    TruncationInterval interval = truncation_bounds(sel.A, sel.b, v, rep.y);
    pvals.push_back(selective_p(t_obs, tau, interval, 0.0, Sided::kTwo));
  }

  out.replicates = static_cast<int>(pvals.size());
  const double n = static_cast<double>(pvals.size());
  for (double level : cfg.levels) {
    int count = 0;
    for (double p : pvals) count += p <= level ? 1 : 0;
    double hat = count / n;
    double sd = std::sqrt(level * (1.0 - level) / n);
    out.exceedance.push_back(hat);
    out.band_low.push_back(level - 2.0 * sd);
    out.band_high.push_back(level + 2.0 * sd);
    if (hat < level - 2.0 * sd || hat > level + 2.0 * sd) out.pass = false;
  }

  std::sort(pvals.begin(), pvals.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    double u = pvals[i];
    ks = std::max(ks, std::fabs((i + 1) / n - u));
    ks = std::max(ks, std::fabs(u - i / n));
  }
  out.ks_statistic = ks;
  return out;
}

CoverageResult calibrate_coverage(const CalibrationConfig& cfg) {
  CoverageResult out;
  out.target = 1.0 - cfg.alpha;
  int covered = 0;
  int total = 0;

  for (int r = 0; r < cfg.replicates; ++r) {
    Replicate rep = draw_replicate(cfg, Rng::derive(cfg.seed, static_cast<std::uint64_t>(r)));
    SelectionOutcome sel = select(cfg, rep.X, rep.y);
    if (sel.selected.empty()) continue;
    double sigma = effective_sigma(cfg, sel);
    for (std::size_t k = 0; k < sel.selected.size(); ++k) {
      Vector v = sel.contrasts.row(static_cast<int>(k)).transpose();
      double t_obs = v.dot(rep.y);
      double tau = sigma * v.norm();
      double target = v.dot(rep.mu);  // projection parameter of the refit
      TruncationInterval interval = truncation_bounds(sel.A, sel.b, v, rep.y);
      auto [lo, hi] = selective_ci(t_obs, tau, interval, cfg.alpha);
      total += 1;
      if (target >= lo && target <= hi) covered += 1;
    }
  }
  out.intervals = total;
  out.coverage = total > 0 ? static_cast<double>(covered) / total : 0.0;
  out.pass = out.coverage >= out.threshold;
  return out;
}

NaiveCompareResult calibrate_naive_compare(const CalibrationConfig& cfg) {
  NaiveCompareResult out;
  out.replicates = cfg.replicates;
  int naive_hits = 0, naive_total = 0;
  int split_hits = 0, split_total = 0;

  for (int r = 0; r < cfg.replicates; ++r) {
    Replicate rep = draw_replicate(cfg, Rng::derive(cfg.seed, static_cast<std::uint64_t>(r)));

    // Naive: select and test on the same data.
    SelectionOutcome sel = select(cfg, rep.X, rep.y);
    if (!sel.selected.empty()) {
      Matrix X_S = take_cols(rep.X, sel.selected);
      auto naive = naive_inference(X_S, rep.y, cfg.alpha);
      naive_total += 1;
      if (naive[0].p_value <= out.level) naive_hits += 1;
    }

    // Split: select on the first half, test on the second.
    int half = cfg.n / 2;
    std::vector<int> first(static_cast<std::size_t>(half));
    std::vector<int> second(static_cast<std::size_t>(cfg.n - half));
    for (int i = 0; i < half; ++i) first[static_cast<std::size_t>(i)] = i;
    for (int i = half; i < cfg.n; ++i) second[static_cast<std::size_t>(i - half)] = i;
    SelectionOutcome sel_half =
        select(cfg, take_rows(rep.X, first), take_rows(rep.y, first));
    if (!sel_half.selected.empty()) {
      Matrix X_S = take_cols(take_rows(rep.X, second), sel_half.selected);
      auto split = split_t_inference(X_S, take_rows(rep.y, second), cfg.alpha);
      split_total += 1;
      if (split[0].p_value <= out.level) split_hits += 1;
    }
  }

  out.naive_exceedance =
      naive_total > 0 ? static_cast<double>(naive_hits) / naive_total : 0.0;
  out.split_exceedance =
      split_total > 0 ? static_cast<double>(split_hits) / split_total : 0.0;
  out.pass = out.naive_exceedance > 0.08 && out.split_exceedance >= 0.035 &&
             out.split_exceedance <= 0.065;
  return out;
}

}  // namespace phitest
