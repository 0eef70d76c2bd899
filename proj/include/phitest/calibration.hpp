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

#ifndef PHITEST_CALIBRATION_HPP
#define PHITEST_CALIBRATION_HPP

#include <cstdint>
#include <vector>

#include "phitest/dataset.hpp"
#include "phitest/selection.hpp"

namespace phitest {

// Simulation harness validating the selective-inference layer on synthetic
// Gaussian designs with forward-stepwise (or fixed-lambda lasso) selection.
struct CalibrationConfig {
  int replicates = 2000;
  int n = 120;
  int p = 6;
  int K = 3;
  double sigma = 1.0;
  SelectorKind selector = SelectorKind::kStepwiseK;
  double lasso_lambda = 0.0;  // used when selector is lasso
  Vector beta;                // empty => the global null beta = 0
  std::uint64_t seed = 0;
  std::vector<double> levels = {0.01, 0.05, 0.1, 0.2};
  double alpha = 0.05;
  bool known_sigma = false;  // plug in the true sigma instead of the refit one
};

// Exceedance of selective p-values under the null, one p-value per replicate
// (the first selected feature's), against +-2 binomial standard deviations.
struct NullCalibrationResult {
  std::vector<double> levels;
  std::vector<double> exceedance;
  std::vector<double> band_low;
  std::vector<double> band_high;
  int replicates = 0;
  double ks_statistic = 0.0;  // against U(0, 1)
  bool pass = true;
};

NullCalibrationResult calibrate_null_p(const CalibrationConfig& cfg);

// Conditional coverage of selective confidence intervals for the projection
// parameters v_j^T mu of every selected coefficient.
struct CoverageResult {
  double coverage = 0.0;
  int intervals = 0;
  double target = 0.95;
  double threshold = 0.94;
  bool pass = true;
};

CoverageResult calibrate_coverage(const CalibrationConfig& cfg);

// Null comparison of the naive same-data t-test against the split-sample
// t-test, one p-value per replicate (the first selected feature's).
struct NaiveCompareResult {
  double naive_exceedance = 0.0;
  double split_exceedance = 0.0;
  double level = 0.05;
  int replicates = 0;
  bool pass = true;  // naive > 0.08 and split within [0.035, 0.065]
};

NaiveCompareResult calibrate_naive_compare(const CalibrationConfig& cfg);

}  // namespace phitest

#endif  // PHITEST_CALIBRATION_HPP
