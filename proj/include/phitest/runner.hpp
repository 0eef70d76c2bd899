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

#ifndef PHITEST_RUNNER_HPP
#define PHITEST_RUNNER_HPP

#include <string>

#include "phitest/report.hpp"

namespace phitest {

// Result of one CLI-level command. `status` is the suggested process exit
// code (nonzero when a calibration band fails).
struct RunOutput {
  std::string text;
  std::string json_str;
  std::string csv;
  std::string shap_csv;  // populated when dump_shap is requested
  int status = 0;
};

RunOutput run_table(const RunConfig& cfg);
RunOutput run_benchmark(const RunConfig& cfg);
RunOutput run_calibrate(const RunConfig& cfg);
RunOutput run_ablate(const RunConfig& cfg);

// Dispatch by command name: table | benchmark | calibrate | ablate.
RunOutput run_command(const std::string& command, const RunConfig& cfg);

}  // namespace phitest

#endif  // PHITEST_RUNNER_HPP
