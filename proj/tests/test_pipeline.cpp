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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "phitest/pipeline.hpp"
#include "phitest/report.hpp"
#include "phitest/rng.hpp"

using namespace phitest;

namespace {

class ScaledPredictor : public Predictor {
 public:
  ScaledPredictor(PredictorPtr inner, double factor)
      : inner_(std::move(inner)), factor_(factor) {}
  double predict(const Vector& x) const override {
    return factor_ * inner_->predict(x);
  }
  int feature_count() const override { return inner_->feature_count(); }
  std::string kind() const override { return inner_->kind(); }

 private:
  PredictorPtr inner_;
  double factor_;
};

PhiTestConfig small_config() {
  PhiTestConfig cfg;
  cfg.max_selected = 2;
  cfg.selector = {SelectorKind::kLarsK, 0.0};
  cfg.mode = PipelineMode::kSplit;
  cfg.background_size = 20;
  cfg.shap_row_cap = 60;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("split-mode phi-test recovers a planted linear pair") {
  Vector beta(6);
  beta << 1, 1, 0, 0, 0, 0;
  Dataset data = synth_gaussian(500, 6, beta, 0.1, 911);
  SplitPlan split = make_split(data.n(), 17, 0.8, true);
  Matrix X_train = take_rows(data.X, split.train_idx);
  Vector y_train = take_rows(data.y, split.train_idx);
  PredictorPtr f = fit_linear(X_train, y_train, 0.0);

  PhiTestConfig cfg = small_config();
  cfg.screen_budget = data.p();  // M = p
  FeatureTable table = phi_test(*f, data, split, cfg);

  std::vector<int> selected = table.selected;
  std::sort(selected.begin(), selected.end());
  CHECK(selected == std::vector<int>{0, 1});
  for (int j : table.selected) {
    REQUIRE(table.rows[static_cast<std::size_t>(j)].inference.has_value());
    CHECK(table.rows[static_cast<std::size_t>(j)].inference->p_value < 0.01);
    CHECK(table.rows[static_cast<std::size_t>(j)].naive.has_value());
  }
}

TEST_CASE("K = 0 skips selection and puts all mass in the residual") {
  Vector beta(4);
  beta << 1, 0, 0, 0;
  Dataset data = synth_gaussian(200, 4, beta, 0.2, 3);
  SplitPlan split = make_split(data.n(), 2, 0.8, true);
  PredictorPtr f = fit_linear(take_rows(data.X, split.train_idx),
                              take_rows(data.y, split.train_idx), 0.0);
  PhiTestConfig cfg = small_config();
  cfg.max_selected = 0;
  FeatureTable table = phi_test(*f, data, split, cfg);
  CHECK(table.selected.empty());
  double total = 0.0;
  for (const auto& row : table.rows) {
    CHECK_FALSE(row.selected);
    total += row.shap_score;
  }
  CHECK(table.residual_score == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("full mode refuses the lars selector") {
  Vector beta(3);
  beta << 1, 0, 0;
  Dataset data = synth_gaussian(100, 3, beta, 0.2, 5);
  SplitPlan split = make_split(data.n(), 2, 0.8, false);
  PredictorPtr f = fit_linear(take_rows(data.X, split.train_idx),
                              take_rows(data.y, split.train_idx), 0.0);
  PhiTestConfig cfg = small_config();
  cfg.mode = PipelineMode::kFull;
  CHECK_THROWS_WITH_AS(phi_test(*f, data, split, cfg),
                       doctest::Contains("polyhedral"), std::invalid_argument);
}

TEST_CASE("full mode with stepwise produces truncated-normal summaries") {
  Vector beta(5);
  beta << 2, 0, -1, 0, 0;
  Dataset data = synth_gaussian(250, 5, beta, 0.5, 7);
  SplitPlan split = make_split(data.n(), 3, 0.8, false);
  GbtConfig gc;
  gc.n_trees = 40;
  PredictorPtr f = fit_gbt(take_rows(data.X, split.train_idx),
                           take_rows(data.y, split.train_idx), gc);
  PhiTestConfig cfg = small_config();
  cfg.mode = PipelineMode::kFull;
  cfg.selector = {SelectorKind::kStepwiseK, 0.0};
  cfg.max_selected = 2;
  FeatureTable table = phi_test(*f, data, split, cfg);
  REQUIRE(table.selected.size() == 2);
  for (int j : table.selected) {
    const auto& s = table.rows[static_cast<std::size_t>(j)].inference;
    REQUIRE(s.has_value());
    CHECK(s->mode == InferenceMode::kTruncatedNormal);
    CHECK(s->p_value >= 0.0);
    CHECK(s->p_value <= 1.0);
  }
}

TEST_CASE("residual mass equals total minus selected mass") {
  Vector beta(5);
  beta << 1, 0.5, 0, 0, 0;
  Dataset data = synth_gaussian(300, 5, beta, 0.3, 19);
  SplitPlan split = make_split(data.n(), 4, 0.8, true);
  GbtConfig gc;
  gc.n_trees = 30;
  PredictorPtr f = fit_gbt(take_rows(data.X, split.train_idx),
                           take_rows(data.y, split.train_idx), gc);
  PhiTestConfig cfg = small_config();
  FeatureTable table = phi_test(*f, data, split, cfg);
  double total = 0.0, selected = 0.0;
  for (const auto& row : table.rows) {
    total += row.shap_score;
    if (row.selected) selected += row.shap_score;
  }
  CHECK(selected + table.residual_score == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("the pipeline is deterministic for a fixed seed") {
  Vector beta(4);
  beta << 1, -1, 0, 0;
  Dataset data = synth_gaussian(240, 4, beta, 0.4, 23);
  SplitPlan split = make_split(data.n(), 9, 0.8, true);
  GbtConfig gc;
  gc.n_trees = 25;
  PredictorPtr f = fit_gbt(take_rows(data.X, split.train_idx),
                           take_rows(data.y, split.train_idx), gc);
  PhiTestConfig cfg = small_config();
  std::string a = feature_table_to_json(phi_test(*f, data, split, cfg)).dump();
  std::string b = feature_table_to_json(phi_test(*f, data, split, cfg)).dump();
  CHECK(a == b);
}

TEST_CASE("split plans keep selection and inference rows apart") {
  Vector beta(4);
  beta << 1, 0, 0, 0;
  Dataset data = synth_gaussian(200, 4, beta, 0.2, 29);
  SplitPlan split = make_split(data.n(), 31, 0.8, true);
  std::set<int> sel(split.selection_idx.begin(), split.selection_idx.end());
  for (int i : split.inference_idx) CHECK(sel.count(i) == 0);
  for (int i : split.test_idx) {
    CHECK(sel.count(i) == 0);
    CHECK(std::find(split.inference_idx.begin(), split.inference_idx.end(),
                    i) == split.inference_idx.end());
  }

  PredictorPtr f = fit_linear(take_rows(data.X, split.train_idx),
                              take_rows(data.y, split.train_idx), 0.0);
  FeatureTable table = phi_test(*f, data, split, small_config());
  CHECK(table.selection_rows == static_cast<int>(split.selection_idx.size()));
  CHECK(table.inference_rows == static_cast<int>(split.inference_idx.size()));
}

TEST_CASE("positively rescaling the predictor leaves the selected set fixed") {
  Vector beta(5);
  beta << 2, -1, 0.5, 0, 0;
  Dataset data = synth_gaussian(300, 5, beta, 0.3, 37);
  SplitPlan split = make_split(data.n(), 5, 0.8, true);
  GbtConfig gc;
  gc.n_trees = 30;
  PredictorPtr f = fit_gbt(take_rows(data.X, split.train_idx),
                           take_rows(data.y, split.train_idx), gc);
  ScaledPredictor scaled(f, 7.0);

  PhiTestConfig cfg = small_config();
  cfg.max_selected = 3;
  FeatureTable base = phi_test(*f, data, split, cfg);
  FeatureTable big = phi_test(scaled, data, split, cfg);
  CHECK(base.selected == big.selected);
  CHECK(base.screened == big.screened);
}

TEST_CASE("spvim bootstrap baseline selects by score stability") {
  ShapMatrix shap;
  shap.phi = Matrix::Zero(40, 3);
  shap.phi.col(1).setConstant(1.0);  // constant nonzero scores
  Rng rng(41);
  for (int i = 0; i < 40; ++i) shap.phi(i, 2) = 0.01 * rng.normal();
  shap.global_scores = global_scores(shap.phi);

  std::vector<int> sel = baseline_spvim_boot(shap, 200, 0.05, 1);
  CHECK(std::find(sel.begin(), sel.end(), 0) == sel.end());  // all-zero column
  CHECK(std::find(sel.begin(), sel.end(), 1) != sel.end());  // zero-SE, positive
  CHECK_THROWS(baseline_spvim_boot(shap, 50, 0.05, 1));
}

TEST_CASE("shap-ht baseline tests the signed mean") {
  ShapMatrix shap;
  shap.phi = Matrix::Zero(40, 3);
  for (int i = 0; i < 40; ++i) {
    shap.phi(i, 0) = i % 2 == 0 ? 1.0 : -1.0;  // large but balanced
  }
  shap.phi.col(1).setConstant(2.0);
  shap.global_scores = global_scores(shap.phi);

  std::vector<int> sel = baseline_shap_ht(shap, 0.05);
  CHECK(std::find(sel.begin(), sel.end(), 0) == sel.end());
  CHECK(std::find(sel.begin(), sel.end(), 1) != sel.end());
}

TEST_CASE("shap-ht retains a planted monotone effect") {
  Rng rng(43);
  int hits = 0;
  for (int rep = 0; rep < 20; ++rep) {
    ShapMatrix shap;
    shap.phi.resize(60, 4);
    for (int i = 0; i < 60; ++i) {
      shap.phi(i, 0) = 0.5 + 0.3 * rng.normal();  // monotone effect
      for (int j = 1; j < 4; ++j) shap.phi(i, j) = 0.3 * rng.normal();
    }
    shap.global_scores = global_scores(shap.phi);
    std::vector<int> sel = baseline_shap_ht(shap, 0.05);
    if (std::find(sel.begin(), sel.end(), 0) != sel.end()) ++hits;
  }
  CHECK(hits >= 18);  // > 0.9 selection frequency
}

TEST_CASE("stable-shap baseline frequencies behave") {
  SUBCASE("a dominant column is always in the top set") {
    ShapMatrix shap;
    shap.phi.resize(50, 3);
    Rng rng(47);
    for (int i = 0; i < 50; ++i) {
      shap.phi(i, 0) = 10.0 + rng.normal();
      shap.phi(i, 1) = 0.1 * rng.normal();
      shap.phi(i, 2) = 0.1 * rng.normal();
    }
    shap.global_scores = global_scores(shap.phi);
    std::vector<int> sel = baseline_stable_shap(shap, 1, 100, 1.0, 3);
    CHECK(sel == std::vector<int>{0});
  }

  SUBCASE("B = 1 reduces to the top-K of a single resample") {
    ShapMatrix shap;
    shap.phi.resize(30, 4);
    Rng rng(53);
    for (int i = 0; i < 30; ++i) {
      for (int j = 0; j < 4; ++j) shap.phi(i, j) = rng.normal() * (j + 1);
    }
    shap.global_scores = global_scores(shap.phi);
    std::vector<int> sel = baseline_stable_shap(shap, 2, 1, 0.7, 9);
    CHECK(sel.size() == 2);
    CHECK(baseline_stable_shap(shap, 2, 1, 0.7, 9) == sel);
  }

  SUBCASE("a near-tie at the boundary shrinks the selected set") {
    // Features 1 and 2 tie exactly in the full sample (mirrored pairs), so
    // each bootstrap resample picks its rank-2 winner by a coin flip and
    // neither reaches the 0.7 frequency bar.
    ShapMatrix shap;
    shap.phi.resize(200, 3);
    Rng rng(59);
    for (int i = 0; i < 200; i += 2) {
      double d = 0.5 * rng.normal();
      shap.phi(i, 0) = 5.0;
      shap.phi(i, 1) = 1.0 + d;
      shap.phi(i, 2) = 1.0 - d;
      shap.phi(i + 1, 0) = 5.0;
      shap.phi(i + 1, 1) = 1.0 - d;
      shap.phi(i + 1, 2) = 1.0 + d;
    }
    shap.global_scores = global_scores(shap.phi);
    std::vector<int> sel = baseline_stable_shap(shap, 2, 400, 0.7, 61);
    CHECK(sel.size() < 2);
    CHECK(std::find(sel.begin(), sel.end(), 0) != sel.end());
  }
}

TEST_CASE("fidelity ratios and edge cases") {
  Vector beta(3);
  beta << 1, -2, 0.5;
  Dataset data = synth_gaussian(400, 3, beta, 0.3, 67);
  SplitPlan split = make_split(data.n(), 7, 0.8, false);
  PredictorPtr f = fit_linear(take_rows(data.X, split.train_idx),
                              take_rows(data.y, split.train_idx), 0.0);

  SUBCASE("the full feature set of a linear model scores about 100%") {
    FidelityResult fid = fidelity(*f, data, split, {0, 1, 2});
    CHECK(fid.defined);
    CHECK(fid.fidelity_pct == doctest::Approx(100.0).epsilon(1e-6));
  }

  SUBCASE("an empty selection scores exactly zero") {
    FidelityResult fid = fidelity(*f, data, split, {});
    CHECK(fid.r2_selected == 0.0);
    CHECK(fid.fidelity_pct == doctest::Approx(0.0));
  }

  SUBCASE("a negative selected-model R2 passes through unclamped") {
    // A pure-noise regressor has no test-set explanatory power; its R2 is
    // negative whenever the fitted mean misses the test mean.
    Dataset noisy = data;
    Rng rng(68);
    for (int i = 0; i < noisy.n(); ++i) noisy.X(i, 2) = rng.normal();
    FidelityResult fid;
    bool found_negative = false;
    for (std::uint64_t seed = 0; seed < 10 && !found_negative; ++seed) {
      SplitPlan sp = make_split(noisy.n(), seed, 0.8, false);
      PredictorPtr g = fit_linear(take_rows(noisy.X, sp.train_idx),
                                  take_rows(noisy.y, sp.train_idx), 0.0);
      fid = fidelity(*g, noisy, sp, {2});
      found_negative = fid.r2_selected < 0.0;
    }
    REQUIRE(found_negative);
    CHECK(fid.fidelity_pct < 0.0);
  }

  SUBCASE("a useless full model makes fidelity undefined") {
    Dataset null_data = synth_gaussian(200, 2, Vector::Zero(2), 1.0, 69);
    SplitPlan sp = make_split(null_data.n(), 1, 0.8, false);
    PredictorPtr g = fit_linear(take_rows(null_data.X, sp.train_idx),
                                take_rows(null_data.y, sp.train_idx), 0.0);
    FidelityResult fid = fidelity(*g, null_data, sp, {0});
    if (fid.r2_full <= 0.0) {
      CHECK_FALSE(fid.defined);
      CHECK(std::isnan(fid.fidelity_pct));
    }
  }

  SUBCASE("an empty test split is rejected") {
    SplitPlan sp = make_split(data.n(), 3, 1.0, false);
    CHECK_THROWS(fidelity(*f, data, sp, {0}));
  }
}

TEST_CASE("stability and robustness arithmetic") {
  CHECK(average_pairwise_jaccard({{1, 2}, {1, 2}, {1, 3}}) ==
        doctest::Approx(5.0 / 9.0));
  CHECK(average_pairwise_jaccard({{1, 2}, {1, 2}, {1, 2}}) ==
        doctest::Approx(1.0));
  CHECK(average_pairwise_jaccard({{1, 2}, {3, 4}}) == doctest::Approx(0.0));
  CHECK_THROWS(average_pairwise_jaccard({{1}}));

  CHECK(robustness({1, 2, 3, 4, 5}, {1, 2, 3, 4, 6}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(robustness({1, 2}, {1, 2}) == doctest::Approx(1.0));
  CHECK(robustness({}, {1}) == doctest::Approx(0.0));
  CHECK(robustness({}, {}) == doctest::Approx(1.0));

  int calls = 0;
  auto run = [&calls](std::uint64_t seed) {
    ++calls;
    return std::vector<int>{static_cast<int>(seed % 2), 7};
  };
  double s = stability(run, 4, 99);
  CHECK(calls == 4);
  CHECK(s >= 0.0);
  CHECK(s <= 1.0);
  CHECK_THROWS(stability(run, 1, 99));
}

TEST_CASE("benchmark produces one row per method with shared semantics") {
  Vector beta(5);
  beta << 2, -1.5, 1, 0, 0;
  Dataset data = synth_gaussian(260, 5, beta, 0.4, 71);

  BackboneFactory gbt = [](const Matrix& X, const Vector& y, std::uint64_t seed) {
    GbtConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = seed;
    return fit_gbt(X, y, cfg);
  };
  BackboneFactory shallow = [](const Matrix& X, const Vector& y,
                               std::uint64_t seed) {
    GbtConfig cfg;
    cfg.n_trees = 10;
    cfg.max_depth = 2;
    cfg.seed = seed + 1;
    return fit_gbt(X, y, cfg);
  };

  BenchmarkConfig cfg;
  cfg.phi = small_config();
  cfg.phi.max_selected = 3;
  cfg.phi.seed = 13;
  cfg.replicates = 3;
  MetricsReport report = benchmark(data, gbt, shallow, cfg);
  REQUIRE(report.methods.size() == 5);
  CHECK(report.methods[0].method == "phi-test");
  CHECK(report.methods[1].method == "SHAP-TopK");
  for (const auto& m : report.methods) {
    CHECK(m.stability >= 0.0);
    CHECK(m.stability <= 1.0);
    CHECK(m.robustness >= 0.0);
    CHECK(m.robustness <= 1.0);
    CHECK(m.sparsity == static_cast<int>(m.selected.size()));
  }
  CHECK(report.methods[3].method == "SHAP-HT");
}

TEST_CASE("ablation variants are consistent with each other") {
  Vector beta(6);
  beta << 2, -1.5, 1, 0, 0, 0;
  Dataset data = synth_gaussian(300, 6, beta, 0.4, 73);

  BackboneFactory gbt = [](const Matrix& X, const Vector& y, std::uint64_t seed) {
    GbtConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = seed;
    return fit_gbt(X, y, cfg);
  };

  AblationConfig cfg;
  cfg.phi = small_config();
  cfg.phi.max_selected = 3;
  cfg.phi.screen_budget = data.p();  // screening disabled: variants 1 == 2
  cfg.phi.seed = 29;
  cfg.replicates = 2;
  std::vector<MethodMetrics> rows = ablation_suite(data, gbt, gbt, cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == "SHAP+Lasso");
  CHECK(rows[1].method == "Lasso-only");
  CHECK(rows[2].method == "SHAP+Stepwise");
  CHECK(rows[3].method == "Lasso-strong");

  std::vector<int> a = rows[0].selected, b = rows[1].selected;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);  // screening with M = p is a no-op
  CHECK(rows[3].sparsity <= rows[0].sparsity);
}

TEST_CASE("a stronger lasso penalty never selects more along the same path") {
  Vector beta(6);
  beta << 3, -2, 1, 0.5, 0, 0;
  Dataset data = synth_gaussian(120, 6, beta, 0.5, 79);
  SelectionOutcome path = lars_first_k(data.X, data.y, 5, true);
  REQUIRE(path.entry_lambdas.size() >= 4);
  double weak = std::sqrt(path.entry_lambdas[3] * path.entry_lambdas[2]);
  double strong = std::sqrt(path.entry_lambdas[1] * path.entry_lambdas[0]);
  SelectionOutcome weak_fit = lasso_fixed_lambda(data.X, data.y, weak);
  SelectionOutcome strong_fit = lasso_fixed_lambda(data.X, data.y, strong);
  CHECK(strong_fit.selected.size() <= weak_fit.selected.size());
}
