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

/*
 * C interface of the phitest shared library.
 *
 * All entry points return 0 on success and -1 on failure; after a failure
 * phitest_last_error() describes what went wrong (the message is thread
 * local). Results are opaque handles that own every string they expose;
 * the strings stay valid until phitest_result_free().
 *
 * Commands: "table", "benchmark", "calibrate", "ablate". The configuration
 * is a JSON object; unknown keys are ignored and missing keys take their
 * defaults. Keys (defaults in parentheses):
 *
 *   data               path to a CSV file with a header row
 *   recipe             none | airquality | concrete        ("none")
 *   target             target column name (recipes may imply it)
 *   backbone           linear | gbt | gbt-shallow | external:<path> |
 *                      saved:<path>                        ("gbt")
 *   backbone_b         second backbone for robustness      ("gbt-shallow")
 *   engine             exact | kernel                      ("exact")
 *   selector           lars | stepwise | lasso:<lambda>    ("lars")
 *   mode               full | split                        ("split")
 *   screen_budget      M, 0 = default rule                 (0)
 *   max_selected       K                                   (5)
 *   alpha              CI level                            (0.05)
 *   seed               master seed                         (0)
 *   replicates         resamples / simulation replicates   (5)
 *   train_fraction     train split fraction                (0.8)
 *   background_size    attribution background rows         (100)
 *   shap_row_cap       cap on attributed rows, 0 = all     (0)
 *   kernel_coalitions  sampled coalitions, 0 = all         (0)
 *   gbt_trees, gbt_depth, gbt_learning_rate, gbt_min_leaf, linear_ridge
 *   calibrate_mode     null_p | coverage | naive_compare   ("null_p")
 *   calibrate_n, calibrate_p, calibrate_k, calibrate_sigma
 *   dump_shap          attach a per-sample attribution CSV (false)
 *   save_model         write the fitted backbone to a path ("")
 */

#ifndef PHITEST_C_API_H
#define PHITEST_C_API_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct phitest_result_s* phitest_result_handle;

/* Library version string, e.g. "phitest 0.1.0". */
const char* phitest_version(void);

/* Message of the most recent failure on this thread ("" if none). */
const char* phitest_last_error(void);

/* Runs a command with a JSON configuration. On success *out owns the
 * rendered results. */
int phitest_run(const char* command, const char* config_json,
                phitest_result_handle* out);

/* Rendered plain-text report. */
int phitest_result_text(phitest_result_handle result, const char** out);

/* Structured JSON mirror (full precision, config echoed). */
int phitest_result_json(phitest_result_handle result, const char** out);

/* CSV rendering where the command defines one ("" otherwise). */
int phitest_result_csv(phitest_result_handle result, const char** out);

/* Per-sample attribution CSV when dump_shap was set ("" otherwise). */
int phitest_result_shap_csv(phitest_result_handle result, const char** out);

/* Suggested process exit status (nonzero for failed calibration bands). */
int phitest_result_status(phitest_result_handle result, int* out);

void phitest_result_free(phitest_result_handle result);

#ifdef __cplusplus
}
#endif

#endif /* PHITEST_C_API_H */
