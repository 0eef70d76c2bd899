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

#include "phitest/c_api.h"

#include <exception>
#include <string>

#include "phitest/report.hpp"
#include "phitest/runner.hpp"

struct phitest_result_s {
  phitest::RunOutput output;
};

namespace {

thread_local std::string g_last_error;

int fail(const std::string& message) {
  g_last_error = message;
  return -1;
}

int require(bool ok, const char* what) {
  return ok ? 0 : fail(std::string("null argument: ") + what);
}

}  // namespace

extern "C" {

const char* phitest_version(void) { return phitest::kVersion; }

const char* phitest_last_error(void) { return g_last_error.c_str(); }

int phitest_run(const char* command, const char* config_json,
                phitest_result_handle* out) {
  if (require(command != nullptr, "command") != 0) return -1;
  if (require(out != nullptr, "out") != 0) return -1;
  *out = nullptr;
  try {
    nlohmann::json config = config_json == nullptr || config_json[0] == '\0'
                                ? nlohmann::json::object()
                                : nlohmann::json::parse(config_json);
    phitest::RunConfig cfg = phitest::run_config_from_json(config);
    auto* result = new phitest_result_s{phitest::run_command(command, cfg)};
    *out = result;
    g_last_error.clear();
    return 0;
  } catch (const std::exception& e) {
    return fail(e.what());
  } catch (...) {
    return fail("unknown error");
  }
}

int phitest_result_text(phitest_result_handle result, const char** out) {
  if (require(result != nullptr, "result") != 0) return -1;
  if (require(out != nullptr, "out") != 0) return -1;
  *out = result->output.text.c_str();
  return 0;
}

int phitest_result_json(phitest_result_handle result, const char** out) {
  if (require(result != nullptr, "result") != 0) return -1;
  if (require(out != nullptr, "out") != 0) return -1;
  *out = result->output.json_str.c_str();
  return 0;
}

int phitest_result_csv(phitest_result_handle result, const char** out) {
  if (require(result != nullptr, "result") != 0) return -1;
  if (require(out != nullptr, "out") != 0) return -1;
  *out = result->output.csv.c_str();
  return 0;
}

int phitest_result_shap_csv(phitest_result_handle result, const char** out) {
  if (require(result != nullptr, "result") != 0) return -1;
  if (require(out != nullptr, "out") != 0) return -1;
  *out = result->output.shap_csv.c_str();
  return 0;
}

int phitest_result_status(phitest_result_handle result, int* out) {
  if (require(result != nullptr, "result") != 0) return -1;
  if (require(out != nullptr, "out") != 0) return -1;
  *out = result->output.status;
  return 0;
}

void phitest_result_free(phitest_result_handle result) { delete result; }

}  // extern "C"
