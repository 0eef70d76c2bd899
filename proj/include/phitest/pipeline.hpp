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

#ifndef PHITEST_PIPELINE_HPP
#define PHITEST_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phitest/dataset.hpp"
#include "phitest/predictor.hpp"
#include "phitest/selection.hpp"
#include "phitest/selinf.hpp"
#include "phitest/shap.hpp"

namespace phitest {

enum class PipelineMode { kFull, kSplit };
enum class EngineKind { kExact, kKernel };

struct SelectorSpec {
  SelectorKind kind = SelectorKind::kLarsK;
  double lambda = 0.0;  // lasso only
};

std::string selector_name(const SelectorSpec& spec);
std::string mode_name(PipelineMode mode);
std::string engine_name(EngineKind engine);

struct PhiTestConfig {
  int screen_budget = 0;   // M; 0 picks the default (min(7, p) if p <= 9, else 10)
  int max_selected = 5;    // K; 0 skips the selection stage entirely
  SelectorSpec selector;
  EngineKind engine = EngineKind::kExact;
  double alpha = 0.05;
  PipelineMode mode = PipelineMode::kSplit;
  int background_size = 100;
  int shap_row_cap = 0;       // 0 => attribute every screening row
  int kernel_coalitions = 0;  // 0 => enumerate all
  std::uint64_t seed = 0;
};

int default_screen_budget(int p);

// One per-feature line of the global importance table.
struct FeatureRow {
  std::string name;
  double shap_score = 0.0;
  bool selected = false;
  int entry_rank = -1;  // position in the selection order, -1 if unselected
  std::optional<SelectiveSummary> inference;
  std::optional<SelectiveSummary> naive;  // split mode: same-data comparison fit
};

// The primary output artifact: one row per feature plus the residual line
// aggregating the attribution mass of unselected features.
struct FeatureTable {
  std::vector<FeatureRow> rows;  // original feature order
  double residual_score = 0.0;
  PipelineMode mode = PipelineMode::kSplit;
  double alpha = 0.05;
  std::vector<int> screened;  // score order
  std::vector<int> selected;  // entry order
  // Provenance, echoed into every rendering.
  std::uint64_t seed = 0;
  std::string selector;
  std::string engine;
  int screen_budget = 0;
  int max_selected = 0;
  int selection_rows = 0;
  int inference_rows = 0;
  bool path_truncated = false;
};

struct PhiTestRun {
  FeatureTable table;
  ShapMatrix shap;
  SelectionOutcome selection;
  bool selection_ran = false;
};

PhiTestRun run_phi_test(const Predictor& f, const Dataset& data,
                        const SplitPlan& split, const PhiTestConfig& cfg);

FeatureTable phi_test(const Predictor& f, const Dataset& data,
                      const SplitPlan& split, const PhiTestConfig& cfg);

// --- Baseline selectors over a shared attribution matrix --------------------

std::vector<int> baseline_topk(const ShapMatrix& shap, int K);
std::vector<int> baseline_spvim_boot(const ShapMatrix& shap, int B,
                                     double level, std::uint64_t seed);
std::vector<int> baseline_shap_ht(const ShapMatrix& shap, double level);
std::vector<int> baseline_stable_shap(const ShapMatrix& shap, int K, int B,
                                      double freq_threshold,
                                      std::uint64_t seed);

// --- Evaluation metrics ------------------------------------------------------

struct FidelityResult {
  double fidelity_pct = 0.0;
  double r2_full = 0.0;
  double r2_selected = 0.0;
  bool defined = true;  // false when r2_full <= 0
};

FidelityResult fidelity(const Predictor& f, const Dataset& data,
                        const SplitPlan& split, const std::vector<int>& S_hat);

// Jaccard similarity with the convention jaccard(empty, empty) = 1.
double jaccard(const std::vector<int>& a, const std::vector<int>& b);
double average_pairwise_jaccard(const std::vector<std::vector<int>>& sets);

// Average pairwise Jaccard of the selections produced by `run` under R
// derived seeds.
double stability(const std::function<std::vector<int>(std::uint64_t)>& run,
                 int R, std::uint64_t master_seed);

double robustness(const std::vector<int>& set_a, const std::vector<int>& set_b);

// --- Benchmark and ablation protocols ----------------------------------------

using BackboneFactory = std::function<PredictorPtr(
    const Matrix& X_train, const Vector& y_train, std::uint64_t seed)>;

struct BenchmarkConfig {
  PhiTestConfig phi;
  int replicates = 5;
  double train_fraction = 0.8;
  int spvim_bootstrap = 200;
  double spvim_level = 0.05;
  double shap_ht_level = 0.05;  // Bonferroni-adjusted internally
  int stable_bootstrap = 200;
  double stable_threshold = 0.7;
};

struct MethodMetrics {
  std::string method;
  FidelityResult fid;
  int sparsity = 0;
  double stability = 0.0;
  double robustness = 0.0;
  std::vector<int> selected;
};

struct MetricsReport {
  std::vector<MethodMetrics> methods;
  int replicates = 0;
  std::uint64_t seed = 0;
};

MetricsReport benchmark(const Dataset& data, const BackboneFactory& backbone,
                        const BackboneFactory& backbone_b,
                        const BenchmarkConfig& cfg);

struct AblationConfig {
  PhiTestConfig phi;  // base configuration; the selector field is ignored
  int replicates = 5;
  double train_fraction = 0.8;
};

std::vector<MethodMetrics> ablation_suite(const Dataset& data,
                                          const BackboneFactory& backbone,
                                          const BackboneFactory& backbone_b,
                                          const AblationConfig& cfg);

}  // namespace phitest

#endif  // PHITEST_PIPELINE_HPP
