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

#ifndef PHITEST_REPORT_HPP
#define PHITEST_REPORT_HPP

#include <string>

#include <json.hpp>

#include "phitest/calibration.hpp"
#include "phitest/pipeline.hpp"

namespace phitest {

extern const char* kVersion;

// Fixed four-decimal rendering, locale independent.
std::string fixed4(double v);

// Full run configuration; serialized verbatim into every output artifact.
struct RunConfig {
  std::string data_path;
  std::string recipe = "none";
  std::string target;
  std::string backbone = "gbt";  // linear | gbt | gbt-shallow | external:<p> | saved:<p>
  std::string backbone_b = "gbt-shallow";
  std::string engine = "exact";    // exact | kernel
  std::string selector = "lars";   // lars | stepwise | lasso:<lambda>
  std::string mode = "split";      // full | split
  int screen_budget = 0;           // M; 0 = default rule
  int max_selected = 5;            // K
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int replicates = 5;
  double train_fraction = 0.8;
  int background_size = 100;
  int shap_row_cap = 0;
  int kernel_coalitions = 0;
  int gbt_trees = 100;
  int gbt_depth = 3;
  double gbt_learning_rate = 0.1;
  int gbt_min_leaf = 5;
  double linear_ridge = 0.0;
  std::string calibrate_mode = "null_p";  // null_p | coverage | naive_compare
  int calibrate_n = 120;
  int calibrate_p = 6;
  int calibrate_k = 3;
  double calibrate_sigma = 1.0;
  bool dump_shap = false;
  std::string save_model;
};

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

// Parsed views of the string-valued knobs (throw on invalid values).
SelectorSpec parse_selector(const std::string& spec);
EngineKind parse_engine(const std::string& name);
PipelineMode parse_mode(const std::string& name);
PhiTestConfig phi_config_from(const RunConfig& cfg, int p);

// Feature table rendering: aligned text with columns
// Feature  SHAP  Coef  SE  z  p-value  95% CI, a residual line, and the
// unselected features listed below with their attribution scores only.
std::string render_feature_table(const FeatureTable& table);
std::string feature_table_to_csv(const FeatureTable& table);
nlohmann::json feature_table_to_json(const FeatureTable& table);
FeatureTable feature_table_from_json(const nlohmann::json& j);

std::string render_metrics(const MetricsReport& report);
std::string metrics_to_csv(const MetricsReport& report);
nlohmann::json metrics_to_json(const MetricsReport& report);

std::string render_method_rows(const std::vector<MethodMetrics>& rows,
                               const std::string& title);
nlohmann::json method_rows_to_json(const std::vector<MethodMetrics>& rows);

std::string render_null_calibration(const NullCalibrationResult& r);
std::string render_coverage(const CoverageResult& r);
std::string render_naive_compare(const NaiveCompareResult& r);
nlohmann::json null_calibration_to_json(const NullCalibrationResult& r);
nlohmann::json coverage_to_json(const CoverageResult& r);
nlohmann::json naive_compare_to_json(const NaiveCompareResult& r);

}  // namespace phitest

#endif  // PHITEST_REPORT_HPP
