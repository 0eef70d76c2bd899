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

#include "phitest/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ols_util.hpp"
#include "phitest/rng.hpp"
#include "phitest/stats_math.hpp"

namespace phitest {

namespace {

constexpr std::uint64_t kBackgroundStream = 1;
constexpr std::uint64_t kRowCapStream = 2;
constexpr std::uint64_t kKernelStream = 3;

std::vector<int> sample_without_replacement(const std::vector<int>& pool,
                                            int count, std::uint64_t seed) {
  if (count >= static_cast<int>(pool.size())) return pool;
  std::vector<int> shuffled = pool;
  Rng rng(seed);
  rng.shuffle(shuffled);
  shuffled.resize(static_cast<std::size_t>(count));
  std::sort(shuffled.begin(), shuffled.end());
  return shuffled;
}

}  // namespace

std::string selector_name(const SelectorSpec& spec) {
  switch (spec.kind) {
    case SelectorKind::kLarsK:
      return "lars";
    case SelectorKind::kStepwiseK:
      return "stepwise";
    case SelectorKind::kLassoLambda:
      return "lasso:" + std::to_string(spec.lambda);
  }
  return "lars";
}

std::string mode_name(PipelineMode mode) {
  return mode == PipelineMode::kFull ? "full" : "split";
}

std::string engine_name(EngineKind engine) {
  return engine == EngineKind::kExact ? "exact" : "kernel";
}

int default_screen_budget(int p) {
  if (p <= 9) return std::min(7, p);
  return std::min(10, p);
}

namespace {

ShapMatrix compute_shap(const Predictor& f, const Matrix& X_rows,
                        const PhiTestConfig& cfg) {
  // An external adapter only answers queries at its bound rows, while the
  // attribution engines evaluate spliced points. A least-squares stand-in fit
  // to the adapter's own predictions serves the engines in that case; the
  // surrogate and inference stages keep using the true predictions.
  const Predictor* shap_f = &f;
  PredictorPtr standin;
  if (f.kind() == "external") {
    Vector preds = predict_batch(f, X_rows);
    try {
      standin = fit_linear(X_rows, preds, 0.0);
    } catch (const std::runtime_error&) {
      standin = fit_linear(X_rows, preds, 1e-8);
    }
    shap_f = standin.get();
  }

  std::vector<int> rows(static_cast<std::size_t>(X_rows.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);

  std::vector<int> bg_rows = sample_without_replacement(
      rows, cfg.background_size, Rng::derive(cfg.seed, kBackgroundStream));
  Background bg = make_background(*shap_f, take_rows(X_rows, bg_rows));

  std::vector<int> eval_rows = rows;
  if (cfg.shap_row_cap > 0) {
    eval_rows = sample_without_replacement(
        rows, cfg.shap_row_cap, Rng::derive(cfg.seed, kRowCapStream));
  }
  Matrix X_eval = take_rows(X_rows, eval_rows);

  if (cfg.engine == EngineKind::kExact) {
    return exact_shap(*shap_f, X_eval, bg);
  }
  KernelShapConfig kcfg;
  kcfg.n_coalitions = cfg.kernel_coalitions;
  kcfg.seed = Rng::derive(cfg.seed, kKernelStream);
  // Small sampled designs can be rank deficient; a tiny ridge keeps the
  // weighted solve well posed without visibly moving the estimates.
  if (kcfg.n_coalitions > 0) kcfg.ridge_eps = 1e-9;
  return kernel_shap(*shap_f, X_eval, bg, kcfg);
}

SelectionOutcome run_selector(const SelectorSpec& spec, const Matrix& X,
                              const Vector& y, int K) {
  switch (spec.kind) {
    case SelectorKind::kLarsK:
      return lars_first_k(X, y, K, /*standardize=*/true);
    case SelectorKind::kStepwiseK:
      return stepwise_first_k(X, y, K);
    case SelectorKind::kLassoLambda:
      return lasso_fixed_lambda(X, y, spec.lambda);
  }
  throw std::logic_error("unknown selector");
}

}  // namespace

PhiTestRun run_phi_test(const Predictor& f, const Dataset& data,
                        const SplitPlan& split, const PhiTestConfig& cfg) {
  const int p = data.p();
  int M = cfg.screen_budget > 0 ? cfg.screen_budget : default_screen_budget(p);
  if (M > p) throw std::invalid_argument("phi_test: M must be <= p");
  if (cfg.max_selected > M) {
    throw std::invalid_argument("phi_test: K must be <= M");
  }
  if (cfg.mode == PipelineMode::kSplit && split.selection_idx.empty()) {
    throw std::invalid_argument(
        "phi_test: split mode requires a split-sample plan (selection half "
        "is empty)");
  }
  if (cfg.mode == PipelineMode::kFull &&
      cfg.selector.kind == SelectorKind::kLarsK && cfg.max_selected > 0) {
    throw std::invalid_argument(
        "phi_test: full-sample inference needs a polyhedral selection event; "
        "lars provides none (use stepwise or lasso:<lambda>, or run --mode "
        "split)");
  }

  const std::vector<int>& screen_rows = cfg.mode == PipelineMode::kSplit
                                            ? split.selection_idx
                                            : split.train_idx;
  Matrix X_screen = take_rows(data.X, screen_rows);

  PhiTestRun run;
  run.shap = compute_shap(f, X_screen, cfg);
  const Vector& scores = run.shap.global_scores;

  std::vector<int> screened = top_m(scores, M);

  FeatureTable& table = run.table;
  table.mode = cfg.mode;
  table.alpha = cfg.alpha;
  table.screened = screened;
  table.seed = cfg.seed;
  table.selector = selector_name(cfg.selector);
  table.engine = engine_name(cfg.engine);
  table.screen_budget = M;
  table.max_selected = cfg.max_selected;
  table.rows.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    table.rows[static_cast<std::size_t>(j)].name = data.feature_names[static_cast<std::size_t>(j)];
    table.rows[static_cast<std::size_t>(j)].shap_score = scores(j);
  }

  if (cfg.max_selected > 0) {
    // Stage 2: surrogate response and selection on the screened design.
    Matrix X_stage2 = take_cols(X_screen, screened);
    Vector y_sur = predict_batch(f, X_screen);
    run.selection = run_selector(cfg.selector, X_stage2, y_sur,
                                 cfg.max_selected);
    run.selection_ran = true;
    table.path_truncated = run.selection.path_truncated;
    table.selection_rows = static_cast<int>(screen_rows.size());

    for (int idx : run.selection.selected) {
      table.selected.push_back(screened[static_cast<std::size_t>(idx)]);
    }

    // Stage 3: inference for the selected coefficients.
    std::vector<SelectiveSummary> summaries;
    if (cfg.mode == PipelineMode::kSplit) {
      Matrix X_inf = take_cols(take_rows(data.X, split.inference_idx),
                               table.selected);
      Vector y_inf = predict_batch(
          f, take_rows(data.X, split.inference_idx));
      summaries = split_t_inference(X_inf, y_inf, cfg.alpha);
      table.inference_rows = static_cast<int>(split.inference_idx.size());

      // Same-data comparison fit over the full training rows.
      Matrix X_naive = take_cols(take_rows(data.X, split.train_idx),
                                 table.selected);
      Vector y_naive = predict_batch(f, take_rows(data.X, split.train_idx));
      std::vector<SelectiveSummary> naive =
          naive_inference(X_naive, y_naive, cfg.alpha);
      for (std::size_t k = 0; k < table.selected.size(); ++k) {
        table.rows[static_cast<std::size_t>(table.selected[k])].naive = naive[k];
      }
    } else {
      const SelectionOutcome& sel = run.selection;
      Vector y_sur_full = y_sur;
      double var_y = (y_sur_full.array() - y_sur_full.mean()).square().mean();
      if (sel.sigma2_hat <= 1e-20 * std::max(var_y, 1e-300)) {
        throw std::runtime_error(
            "phi_test: surrogate refit has zero residual variance; "
            "truncated-normal inference is undefined");
      }
      double sigma = std::sqrt(sel.sigma2_hat);
      for (std::size_t k = 0; k < sel.selected.size(); ++k) {
        Vector v = sel.contrasts.row(static_cast<int>(k)).transpose();
        double t_obs = v.dot(y_sur_full);
        double tau = sigma * v.norm();
        TruncationInterval interval =
            truncation_bounds(sel.A, sel.b, v, y_sur_full);
        SelectiveSummary s;
        s.observed = t_obs;
        s.theta_hat = sel.beta_hat(static_cast<int>(k));
        s.scale = tau;
        s.stat = tau > 0.0 ? t_obs / tau : 0.0;
        // Log-space tails keep the two-sided p-value defined even when the
        // interval mass under the null underflows (very strong signals).
        double log_lo = tn_log_cdf(t_obs, 0.0, tau, interval.lower, interval.upper);
        double log_hi = tn_log_sf(t_obs, 0.0, tau, interval.lower, interval.upper);
        if (std::isnan(log_lo) || std::isnan(log_hi)) {
          throw std::runtime_error(
              "phi_test: truncation interval numerically empty");
        }
        s.p_value = std::min(
            1.0, 2.0 * std::exp(std::min(log_lo, log_hi)));
        auto [lo, hi] = selective_ci(t_obs, tau, interval, cfg.alpha);
        s.ci_low = lo;
        s.ci_high = hi;
        s.alpha = cfg.alpha;
        s.mode = InferenceMode::kTruncatedNormal;
        summaries.push_back(s);
      }
      table.selection_rows = static_cast<int>(screen_rows.size());
      table.inference_rows = table.selection_rows;
    }

    for (std::size_t k = 0; k < table.selected.size(); ++k) {
      FeatureRow& row = table.rows[static_cast<std::size_t>(table.selected[k])];
      row.selected = true;
      row.entry_rank = static_cast<int>(k);
      row.inference = summaries[k];
    }
  } else {
    table.selection_rows = static_cast<int>(screen_rows.size());
  }

  double residual = 0.0;
  for (int j = 0; j < p; ++j) {
    if (!table.rows[static_cast<std::size_t>(j)].selected) residual += scores(j);
  }
  table.residual_score = residual;
  return run;
}

FeatureTable phi_test(const Predictor& f, const Dataset& data,
                      const SplitPlan& split, const PhiTestConfig& cfg) {
  return run_phi_test(f, data, split, cfg).table;
}

// --- Baselines ---------------------------------------------------------------

std::vector<int> baseline_topk(const ShapMatrix& shap, int K) {
  return top_m(shap.global_scores, K);
}

std::vector<int> baseline_spvim_boot(const ShapMatrix& shap, int B,
                                     double level, std::uint64_t seed) {
  if (B < 100) {
    throw std::invalid_argument("baseline_spvim_boot: B must be >= 100");
  }
  const int n = static_cast<int>(shap.phi.rows());
  const int p = static_cast<int>(shap.phi.cols());
  Matrix boot_scores(B, p);
  Rng rng(seed);
  for (int b = 0; b < B; ++b) {
    Vector acc = Vector::Zero(p);
    for (int i = 0; i < n; ++i) {
      int row = rng.uniform_int(n);
      acc += shap.phi.row(row).cwiseAbs();
    }
    boot_scores.row(b) = acc.transpose() / n;
  }
  std::vector<int> selected;
  for (int j = 0; j < p; ++j) {
    double mean = shap.global_scores(j);
    double sd = std::sqrt(
        (boot_scores.col(j).array() - boot_scores.col(j).mean()).square().sum() /
        (B - 1));
    double pval;
    if (sd <= 0.0) {
      pval = mean > 0.0 ? 0.0 : 1.0;
    } else {
      pval = norm_sf(mean / sd);  // one-sided: scores are nonnegative
    }
    if (pval < level) selected.push_back(j);
  }
  return selected;
}

std::vector<int> baseline_shap_ht(const ShapMatrix& shap, double level) {
  const int n = static_cast<int>(shap.phi.rows());
  const int p = static_cast<int>(shap.phi.cols());
  if (n < 3) throw std::invalid_argument("baseline_shap_ht: needs n >= 3");
  std::vector<int> selected;
  for (int j = 0; j < p; ++j) {
    double mean = shap.phi.col(j).mean();
    double var = (shap.phi.col(j).array() - mean).square().sum() / (n - 1);
    double pval;
    if (var <= 0.0) {
      pval = mean != 0.0 ? 0.0 : 1.0;
    } else {
      double t = mean / std::sqrt(var / n);
      pval = 2.0 * student_t_sf(std::fabs(t), n - 1);
    }
    if (pval < level / p) selected.push_back(j);
  }
  return selected;
}

std::vector<int> baseline_stable_shap(const ShapMatrix& shap, int K, int B,
                                      double freq_threshold,
                                      std::uint64_t seed) {
  if (B < 1) throw std::invalid_argument("baseline_stable_shap: B must be >= 1");
  if (!(freq_threshold > 0.0 && freq_threshold <= 1.0)) {
    throw std::invalid_argument(
        "baseline_stable_shap: freq_threshold must lie in (0, 1]");
  }
  const int n = static_cast<int>(shap.phi.rows());
  const int p = static_cast<int>(shap.phi.cols());
  std::vector<int> counts(static_cast<std::size_t>(p), 0);
  Rng rng(seed);
  for (int b = 0; b < B; ++b) {
    Vector acc = Vector::Zero(p);
    for (int i = 0; i < n; ++i) {
      int row = rng.uniform_int(n);
      acc += shap.phi.row(row).cwiseAbs();
    }
    for (int j : top_m(acc / n, K)) counts[static_cast<std::size_t>(j)] += 1;
  }
  std::vector<int> selected;
  for (int j = 0; j < p; ++j) {
    if (static_cast<double>(counts[static_cast<std::size_t>(j)]) / B >=
        freq_threshold) {
      selected.push_back(j);
    }
  }
  return selected;
}

// --- Metrics ------------------------------------------------------------------

FidelityResult fidelity(const Predictor& f, const Dataset& data,
                        const SplitPlan& split, const std::vector<int>& S_hat) {
  if (split.test_idx.empty()) {
    throw std::invalid_argument("fidelity: test split is empty");
  }
  Matrix X_test = take_rows(data.X, split.test_idx);
  Vector y_test = take_rows(data.y, split.test_idx);

  FidelityResult out;
  out.r2_full = detail::r_squared(y_test, predict_batch(f, X_test));

  if (S_hat.empty()) {
    out.r2_selected = 0.0;
  } else {
    Matrix X_train = take_cols(take_rows(data.X, split.train_idx), S_hat);
    Vector y_train = take_rows(data.y, split.train_idx);
    detail::OlsSolution sol =
        detail::ols_solve(X_train, y_train, /*want_contrasts=*/false);
    Matrix X_test_sel = take_cols(X_test, S_hat);
    Vector pred = (X_test_sel * sol.beta).array() + sol.intercept;
    out.r2_selected = detail::r_squared(y_test, pred);
  }

  if (out.r2_full <= 0.0) {
    out.defined = false;
    out.fidelity_pct = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.fidelity_pct = 100.0 * out.r2_selected / out.r2_full;
  }
  return out;
}

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  std::set<int> sa(a.begin(), a.end());
  std::set<int> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  int inter = 0;
  for (int x : sa) inter += sb.count(x) ? 1 : 0;
  int uni = static_cast<int>(sa.size() + sb.size()) - inter;
  return static_cast<double>(inter) / uni;
}

double average_pairwise_jaccard(const std::vector<std::vector<int>>& sets) {
  const int R = static_cast<int>(sets.size());
  if (R < 2) throw std::invalid_argument("stability needs at least 2 runs");

  // Pairwise Jaccard values are small-integer fractions; accumulate them
  // over a common denominator so ratios like 5/9 come out exact. Falls back
  // to floating accumulation if the common denominator grows too large.
  std::vector<std::pair<long long, long long>> fracs;
  for (int r = 0; r < R; ++r) {
    for (int s = r + 1; s < R; ++s) {
      std::set<int> sa(sets[static_cast<std::size_t>(r)].begin(),
                       sets[static_cast<std::size_t>(r)].end());
      std::set<int> sb(sets[static_cast<std::size_t>(s)].begin(),
                       sets[static_cast<std::size_t>(s)].end());
      long long inter = 0;
      for (int x : sa) inter += sb.count(x) ? 1 : 0;
      long long uni = static_cast<long long>(sa.size() + sb.size()) - inter;
      if (uni == 0) {
        fracs.emplace_back(1, 1);  // two empty selections count as identical
      } else {
        fracs.emplace_back(inter, uni);
      }
    }
  }
  long long common = 1;
  bool exact = true;
  for (const auto& [num, den] : fracs) {
    common = std::lcm(common, den);
    if (common > (1LL << 46)) {
      exact = false;
      break;
    }
  }
  if (exact) {
    long long total = 0;
    for (const auto& [num, den] : fracs) total += num * (common / den);
    return static_cast<double>(total) /
           (static_cast<double>(common) * static_cast<double>(fracs.size()));
  }
  double sum = 0.0;
  for (const auto& [num, den] : fracs) {
    sum += static_cast<double>(num) / static_cast<double>(den);
  }
  return sum / static_cast<double>(fracs.size());
}

double stability(const std::function<std::vector<int>(std::uint64_t)>& run,
                 int R, std::uint64_t master_seed) {
  if (R < 2) throw std::invalid_argument("stability: R must be >= 2");
  std::vector<std::vector<int>> sets;
  for (int r = 0; r < R; ++r) {
    sets.push_back(run(Rng::derive(master_seed, 100 + static_cast<std::uint64_t>(r))));
  }
  return average_pairwise_jaccard(sets);
}

double robustness(const std::vector<int>& set_a, const std::vector<int>& set_b) {
  return jaccard(set_a, set_b);
}

// --- Benchmark ----------------------------------------------------------------

namespace {

struct ReplicateContext {
  SplitPlan split;
  PredictorPtr model;
  ShapMatrix shap;
};

ReplicateContext make_replicate(const Dataset& data,
                                const BackboneFactory& backbone,
                                const PhiTestConfig& phi_cfg,
                                double train_fraction, std::uint64_t seed) {
  ReplicateContext ctx;
  ctx.split = make_split(data.n(), seed, train_fraction,
                         phi_cfg.mode == PipelineMode::kSplit);
  Matrix X_train = take_rows(data.X, ctx.split.train_idx);
  Vector y_train = take_rows(data.y, ctx.split.train_idx);
  ctx.model = backbone(X_train, y_train, seed);

  const std::vector<int>& screen_rows = phi_cfg.mode == PipelineMode::kSplit
                                            ? ctx.split.selection_idx
                                            : ctx.split.train_idx;
  PhiTestConfig shap_cfg = phi_cfg;
  shap_cfg.seed = seed;
  ctx.shap = compute_shap(*ctx.model, take_rows(data.X, screen_rows), shap_cfg);
  return ctx;
}

std::vector<int> phi_select(const Dataset& data, const ReplicateContext& ctx,
                            const PhiTestConfig& phi_cfg, std::uint64_t seed) {
  PhiTestConfig cfg = phi_cfg;
  cfg.seed = seed;
  return run_phi_test(*ctx.model, data, ctx.split, cfg).table.selected;
}

}  // namespace

MetricsReport benchmark(const Dataset& data, const BackboneFactory& backbone,
                        const BackboneFactory& backbone_b,
                        const BenchmarkConfig& cfg) {
  if (cfg.replicates < 2) {
    throw std::invalid_argument("benchmark: replicates must be >= 2");
  }
  const int K = cfg.phi.max_selected;
  const std::uint64_t seed = cfg.phi.seed;

  struct MethodDef {
    std::string name;
    std::function<std::vector<int>(const ReplicateContext&, std::uint64_t)>
        select;
  };
  std::vector<MethodDef> defs;
  defs.push_back({"phi-test", [&](const ReplicateContext& ctx, std::uint64_t s) {
                    return phi_select(data, ctx, cfg.phi, s);
                  }});
  defs.push_back({"SHAP-TopK", [&](const ReplicateContext& ctx, std::uint64_t) {
                    return baseline_topk(ctx.shap, K);
                  }});
  defs.push_back({"SPVIM-Boot", [&](const ReplicateContext& ctx, std::uint64_t s) {
                    return baseline_spvim_boot(ctx.shap, cfg.spvim_bootstrap,
                                               cfg.spvim_level, s);
                  }});
  defs.push_back({"SHAP-HT", [&](const ReplicateContext& ctx, std::uint64_t) {
                    return baseline_shap_ht(ctx.shap, cfg.shap_ht_level);
                  }});
  defs.push_back({"StableSHAP", [&](const ReplicateContext& ctx, std::uint64_t s) {
                    return baseline_stable_shap(ctx.shap, K,
                                                cfg.stable_bootstrap,
                                                cfg.stable_threshold, s);
                  }});

  // Primary replicate plus resampled replicates for stability.
  std::vector<ReplicateContext> reps;
  for (int r = 0; r < cfg.replicates; ++r) {
    reps.push_back(make_replicate(data, backbone, cfg.phi, cfg.train_fraction,
                                  Rng::derive(seed, 10 + static_cast<std::uint64_t>(r))));
  }
  // Robustness compares backbones on a common split.
  ReplicateContext alt;
  alt.split = reps[0].split;
  {
    Matrix X_train = take_rows(data.X, alt.split.train_idx);
    Vector y_train = take_rows(data.y, alt.split.train_idx);
    alt.model = backbone_b(X_train, y_train, Rng::derive(seed, 10));
    const std::vector<int>& screen_rows =
        cfg.phi.mode == PipelineMode::kSplit ? alt.split.selection_idx
                                             : alt.split.train_idx;
    PhiTestConfig shap_cfg = cfg.phi;
    shap_cfg.seed = Rng::derive(seed, 10);
    alt.shap = compute_shap(*alt.model, take_rows(data.X, screen_rows), shap_cfg);
  }

  MetricsReport report;
  report.replicates = cfg.replicates;
  report.seed = seed;
  for (const auto& def : defs) {
    MethodMetrics m;
    m.method = def.name;
    std::vector<std::vector<int>> sets;
    for (int r = 0; r < cfg.replicates; ++r) {
      sets.push_back(def.select(reps[static_cast<std::size_t>(r)],
                                Rng::derive(seed, 10 + static_cast<std::uint64_t>(r))));
    }
    m.selected = sets[0];
    m.sparsity = static_cast<int>(sets[0].size());
    m.fid = fidelity(*reps[0].model, data, reps[0].split, sets[0]);
    m.stability = average_pairwise_jaccard(sets);
    std::vector<int> alt_set = def.select(alt, Rng::derive(seed, 10));
    m.robustness = robustness(sets[0], alt_set);
    report.methods.push_back(std::move(m));
  }
  return report;
}

// --- Ablation -----------------------------------------------------------------

std::vector<MethodMetrics> ablation_suite(const Dataset& data,
                                          const BackboneFactory& backbone,
                                          const BackboneFactory& backbone_b,
                                          const AblationConfig& cfg) {
  const std::uint64_t seed = cfg.phi.seed;
  const int K = cfg.phi.max_selected;

  // A strong penalty for the lasso variant, pinned from the primary
  // replicate's path: the level between the max(1, K-2)-th and following
  // entries, which admits at most K-2 active features on that instance.
  ReplicateContext primary = make_replicate(
      data, backbone, cfg.phi, cfg.train_fraction, Rng::derive(seed, 10));
  double lambda_strong;
  {
    const std::vector<int>& screen_rows =
        cfg.phi.mode == PipelineMode::kSplit ? primary.split.selection_idx
                                             : primary.split.train_idx;
    Matrix X_screen = take_rows(data.X, screen_rows);
    int M = cfg.phi.screen_budget > 0 ? cfg.phi.screen_budget
                                      : default_screen_budget(data.p());
    std::vector<int> screened = top_m(primary.shap.global_scores, M);
    Matrix X_stage2 = take_cols(X_screen, screened);
    Vector y_sur = predict_batch(*primary.model, X_screen);
    SelectionOutcome path = lars_first_k(X_stage2, y_sur, K, true);
    int e = std::max(1, K - 2);
    if (static_cast<int>(path.entry_lambdas.size()) > e) {
      lambda_strong = std::sqrt(path.entry_lambdas[static_cast<std::size_t>(e - 1)] *
                                path.entry_lambdas[static_cast<std::size_t>(e)]);
    } else {
      lambda_strong = path.entry_lambdas.back() * 2.0;
    }
  }

  struct Variant {
    std::string name;
    PhiTestConfig cfg;
  };
  std::vector<Variant> variants;
  {
    PhiTestConfig shap_lasso = cfg.phi;
    shap_lasso.selector = {SelectorKind::kLarsK, 0.0};
    variants.push_back({"SHAP+Lasso", shap_lasso});

    PhiTestConfig lasso_only = shap_lasso;
    lasso_only.screen_budget = data.p();  // screening disabled
    variants.push_back({"Lasso-only", lasso_only});

    PhiTestConfig shap_stepwise = cfg.phi;
    shap_stepwise.selector = {SelectorKind::kStepwiseK, 0.0};
    variants.push_back({"SHAP+Stepwise", shap_stepwise});

    PhiTestConfig lasso_strong = cfg.phi;
    lasso_strong.selector = {SelectorKind::kLassoLambda, lambda_strong};
    variants.push_back({"Lasso-strong", lasso_strong});
  }

  // Replicates and the second backbone are shared across variants.
  std::vector<ReplicateContext> reps;
  reps.push_back(primary);
  for (int r = 1; r < cfg.replicates; ++r) {
    reps.push_back(make_replicate(data, backbone, cfg.phi, cfg.train_fraction,
                                  Rng::derive(seed, 10 + static_cast<std::uint64_t>(r))));
  }
  ReplicateContext alt;
  alt.split = primary.split;
  {
    Matrix X_train = take_rows(data.X, alt.split.train_idx);
    Vector y_train = take_rows(data.y, alt.split.train_idx);
    alt.model = backbone_b(X_train, y_train, Rng::derive(seed, 10));
    const std::vector<int>& screen_rows =
        cfg.phi.mode == PipelineMode::kSplit ? alt.split.selection_idx
                                             : alt.split.train_idx;
    PhiTestConfig shap_cfg = cfg.phi;
    shap_cfg.seed = Rng::derive(seed, 10);
    alt.shap = compute_shap(*alt.model, take_rows(data.X, screen_rows),
                            shap_cfg);
  }

  std::vector<MethodMetrics> rows;
  for (const auto& variant : variants) {
    MethodMetrics m;
    m.method = variant.name;
    std::vector<std::vector<int>> sets;
    for (int r = 0; r < cfg.replicates; ++r) {
      std::uint64_t rs = Rng::derive(seed, 10 + static_cast<std::uint64_t>(r));
      sets.push_back(phi_select(data, reps[static_cast<std::size_t>(r)],
                                variant.cfg, rs));
    }
    m.selected = sets[0];
    m.sparsity = static_cast<int>(sets[0].size());
    m.fid = fidelity(*primary.model, data, primary.split, sets[0]);
    m.stability = average_pairwise_jaccard(sets);
    std::vector<int> alt_set = phi_select(data, alt, variant.cfg,
                                          Rng::derive(seed, 10));
    m.robustness = robustness(sets[0], alt_set);
    rows.push_back(std::move(m));
  }
  return rows;
}

}  // namespace phitest
