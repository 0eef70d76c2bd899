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

#include <limits>
#include <sstream>

#include "phitest/report.hpp"

using namespace phitest;

namespace {

FeatureTable fixture_table() {
  FeatureTable table;
  table.mode = PipelineMode::kSplit;
  table.alpha = 0.05;
  table.selector = "lars";
  table.engine = "exact";
  table.screen_budget = 3;
  table.max_selected = 2;
  table.seed = 42;
  table.screened = {0, 1, 2};
  table.selected = {0, 2};
  table.selection_rows = 50;
  table.inference_rows = 50;

  SelectiveSummary s0;
  s0.observed = s0.theta_hat = 0.0628;
  s0.scale = 0.0085;
  s0.stat = 7.3882;
  s0.p_value = 0.0000123;
  s0.ci_low = 0.0462;
  s0.ci_high = 0.0795;
  s0.alpha = 0.05;
  s0.mode = InferenceMode::kSplitT;

  SelectiveSummary s2 = s0;
  s2.theta_hat = s2.observed = -0.5;
  s2.stat = -2.1;
  s2.p_value = 0.04;
  s2.ci_low = -0.9;
  s2.ci_high = -0.1;

  FeatureRow r0{"C6H6(GT)", 0.4487, true, 0, s0, std::nullopt};
  FeatureRow r1{"T", 0.02, false, -1, std::nullopt, std::nullopt};
  FeatureRow r2{"NOx(GT)", 0.1717, true, 1, s2, std::nullopt};
  table.rows = {r0, r1, r2};
  table.residual_score = 0.02;
  return table;
}

std::vector<std::string> header_tokens(const std::string& text) {
  std::istringstream first_line(text.substr(0, text.find('\n')));
  std::vector<std::string> tokens;
  std::string tok;
  while (first_line >> tok) tokens.push_back(tok);
  return tokens;
}

bool summaries_equal(const SelectiveSummary& a, const SelectiveSummary& b) {
  return a.observed == b.observed && a.theta_hat == b.theta_hat &&
         a.scale == b.scale && a.stat == b.stat && a.p_value == b.p_value &&
         a.ci_low == b.ci_low && a.ci_high == b.ci_high && a.alpha == b.alpha &&
         a.mode == b.mode;
}

}  // namespace

TEST_CASE("fixed4 renders four locale-independent decimals") {
  CHECK(fixed4(0.062845) == "0.0628");
  CHECK(fixed4(-1.0) == "-1.0000");
  CHECK(fixed4(7.42294) == "7.4229");
  CHECK(fixed4(0.0) == "0.0000");
  CHECK(fixed4(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(fixed4(std::nan("")) == "nan");
}

TEST_CASE("table header carries the exact column names in order") {
  std::string text = render_feature_table(fixture_table());
  std::vector<std::string> tokens = header_tokens(text);
  REQUIRE(tokens.size() == 8);
  CHECK(tokens[0] == "Feature");
  CHECK(tokens[1] == "SHAP");
  CHECK(tokens[2] == "Coef");
  CHECK(tokens[3] == "SE");
  CHECK(tokens[4] == "z");
  CHECK(tokens[5] == "p-value");
  CHECK(tokens[6] == "95%");
  CHECK(tokens[7] == "CI");
}

TEST_CASE("selected rows render values, unselected rows render dashes") {
  std::string text = render_feature_table(fixture_table());
  CHECK(text.find("C6H6(GT)") != std::string::npos);
  CHECK(text.find("0.4487") != std::string::npos);
  CHECK(text.find("0.0628") != std::string::npos);
  CHECK(text.find("[0.0462, 0.0795]") != std::string::npos);
  CHECK(text.find("Residual (unselected)") != std::string::npos);
  // The selected block precedes the residual row, which precedes unselected.
  CHECK(text.find("C6H6(GT)") < text.find("Residual"));
  CHECK(text.find("Residual") < text.find("\nT "));
  // p-values are rendered at four decimals.
  CHECK(text.find("0.0000") != std::string::npos);
}

TEST_CASE("an empty selection renders the residual row plus every feature") {
  FeatureTable table = fixture_table();
  for (auto& row : table.rows) {
    row.selected = false;
    row.inference.reset();
    row.entry_rank = -1;
  }
  table.selected.clear();
  table.residual_score = 0.4487 + 0.02 + 0.1717;
  std::string text = render_feature_table(table);
  CHECK(text.find("Residual (unselected)") != std::string::npos);
  CHECK(text.find("C6H6(GT)") != std::string::npos);
  CHECK(text.find("NOx(GT)") != std::string::npos);
  CHECK(text.find("0.6404") != std::string::npos);  // residual mass
}

TEST_CASE("the JSON mirror reparses to an identical table") {
  FeatureTable table = fixture_table();
  nlohmann::json j = feature_table_to_json(table);
  FeatureTable back = feature_table_from_json(j);

  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(back.rows[i].name == table.rows[i].name);
    CHECK(back.rows[i].shap_score == table.rows[i].shap_score);
    CHECK(back.rows[i].selected == table.rows[i].selected);
    CHECK(back.rows[i].entry_rank == table.rows[i].entry_rank);
    REQUIRE(back.rows[i].inference.has_value() ==
            table.rows[i].inference.has_value());
    if (table.rows[i].inference) {
      CHECK(summaries_equal(*back.rows[i].inference, *table.rows[i].inference));
    }
  }
  CHECK(back.residual_score == table.residual_score);
  CHECK(back.mode == table.mode);
  CHECK(back.alpha == table.alpha);
  CHECK(back.screened == table.screened);
  CHECK(back.selected == table.selected);
  CHECK(back.seed == table.seed);
  CHECK(back.selector == table.selector);
  CHECK(back.engine == table.engine);
  CHECK(back.screen_budget == table.screen_budget);
  CHECK(back.max_selected == table.max_selected);
  CHECK(back.selection_rows == table.selection_rows);
  CHECK(back.inference_rows == table.inference_rows);
  CHECK(back.path_truncated == table.path_truncated);
}

TEST_CASE("infinite interval endpoints survive the JSON round trip") {
  FeatureTable table = fixture_table();
  table.rows[0].inference->ci_high = std::numeric_limits<double>::infinity();
  nlohmann::json j = feature_table_to_json(table);
  FeatureTable back = feature_table_from_json(j);
  CHECK(back.rows[0].inference->ci_high ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("run config round-trips through JSON with defaults") {
  RunConfig cfg;
  cfg.data_path = "somewhere.csv";
  cfg.selector = "lasso:2.5";
  cfg.seed = 987;
  cfg.dump_shap = true;
  nlohmann::json j = run_config_to_json(cfg);
  RunConfig back = run_config_from_json(j);
  CHECK(back.data_path == cfg.data_path);
  CHECK(back.selector == cfg.selector);
  CHECK(back.seed == cfg.seed);
  CHECK(back.dump_shap == cfg.dump_shap);
  CHECK(back.alpha == cfg.alpha);

  RunConfig partial = run_config_from_json(nlohmann::json{{"seed", 3}});
  CHECK(partial.seed == 3);
  CHECK(partial.max_selected == 5);
  CHECK(partial.mode == "split");
}

TEST_CASE("selector strings parse and validate") {
  CHECK(parse_selector("lars").kind == SelectorKind::kLarsK);
  CHECK(parse_selector("stepwise").kind == SelectorKind::kStepwiseK);
  SelectorSpec lasso = parse_selector("lasso:3.5");
  CHECK(lasso.kind == SelectorKind::kLassoLambda);
  CHECK(lasso.lambda == doctest::Approx(3.5));
  CHECK_THROWS(parse_selector("lasso:-1"));
  CHECK_THROWS(parse_selector("ridge"));
  CHECK_THROWS(parse_engine("treeshap"));
  CHECK_THROWS(parse_mode("both"));
}

TEST_CASE("metrics render as a table and as CSV") {
  MetricsReport report;
  report.replicates = 5;
  MethodMetrics m;
  m.method = "phi-test";
  m.fid = {65.2, 0.9, 0.58, true};
  m.sparsity = 5;
  m.stability = 1.0;
  m.robustness = 1.0;
  report.methods.push_back(m);
  std::string text = render_metrics(report);
  CHECK(text.find("phi-test") != std::string::npos);
  CHECK(text.find("65.2000") != std::string::npos);
  std::string csv = metrics_to_csv(report);
  CHECK(csv.rfind("method,fidelity_pct,sparsity,stability,robustness\n", 0) ==
        0);
  CHECK(csv.find("phi-test,65.2000,5,1.0000,1.0000") != std::string::npos);
}
