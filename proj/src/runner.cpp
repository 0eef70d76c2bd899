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

#include "phitest/runner.hpp"

#include <stdexcept>

#include "phitest/rng.hpp"

namespace phitest {

namespace {

using nlohmann::json;

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.data_path.empty()) {
    throw std::invalid_argument("no dataset given (--data <csv>)");
  }
  return load_csv(cfg.data_path, cfg.target, parse_recipe(cfg.recipe));
}

// Builds the training factory for a backbone spec string. External adapters
// are bound to the full dataset rows; their training inputs are ignored.
BackboneFactory backbone_factory(const std::string& spec, const RunConfig& cfg,
                                 const Dataset& data) {
  if (spec == "linear") {
    double ridge = cfg.linear_ridge;
    return [ridge](const Matrix& X, const Vector& y, std::uint64_t) {
      return fit_linear(X, y, ridge);
    };
  }
  if (spec == "gbt") {
    GbtConfig gc;
    gc.n_trees = cfg.gbt_trees;
    gc.max_depth = cfg.gbt_depth;
    gc.learning_rate = cfg.gbt_learning_rate;
    gc.min_leaf = cfg.gbt_min_leaf;
    return [gc](const Matrix& X, const Vector& y, std::uint64_t seed) {
      GbtConfig c = gc;
      c.seed = seed;
      return fit_gbt(X, y, c);
    };
  }
  if (spec == "gbt-shallow") {
    GbtConfig gc;
    gc.n_trees = std::max(20, cfg.gbt_trees / 2);
    gc.max_depth = std::max(1, cfg.gbt_depth - 1);
    gc.learning_rate = cfg.gbt_learning_rate;
    gc.min_leaf = cfg.gbt_min_leaf * 2;
    gc.subsample = 0.8;
    return [gc](const Matrix& X, const Vector& y, std::uint64_t seed) {
      GbtConfig c = gc;
      c.seed = Rng::derive(seed, 77);
      return fit_gbt(X, y, c);
    };
  }
  if (spec.rfind("external:", 0) == 0) {
    std::string path = spec.substr(9);
    PredictorPtr f = external_predictor(path, data.X);
    return [f](const Matrix&, const Vector&, std::uint64_t) { return f; };
  }
  if (spec.rfind("saved:", 0) == 0) {
    PredictorPtr f = load_predictor(spec.substr(6));
    return [f](const Matrix&, const Vector&, std::uint64_t) { return f; };
  }
  throw std::invalid_argument(
      "unknown backbone: " + spec +
      " (expected linear, gbt, gbt-shallow, external:<path>, saved:<path>)");
}

json with_provenance(const RunConfig& cfg, json payload) {
  payload["config"] = run_config_to_json(cfg);
  payload["version"] = kVersion;
  return payload;
}

// Every artifact carries the version and the full configuration.
void stamp(RunOutput* out, const RunConfig& cfg) {
  std::string line = std::string("# ") + kVersion +
                     " config=" + run_config_to_json(cfg).dump();
  out->text += line + "\n";
  if (!out->csv.empty()) out->csv += line + "\n";
}

}  // namespace

RunOutput run_table(const RunConfig& cfg) {
  Dataset data = load_dataset(cfg);
  PhiTestConfig phi = phi_config_from(cfg, data.p());
  SplitPlan split = make_split(data.n(), cfg.seed, cfg.train_fraction,
                               phi.mode == PipelineMode::kSplit);
  BackboneFactory backbone = backbone_factory(cfg.backbone, cfg, data);
  Matrix X_train = take_rows(data.X, split.train_idx);
  Vector y_train = take_rows(data.y, split.train_idx);
  PredictorPtr f = backbone(X_train, y_train, cfg.seed);
  if (!cfg.save_model.empty()) save_predictor(*f, cfg.save_model);

  PhiTestRun run = run_phi_test(*f, data, split, phi);

  RunOutput out;
  out.text = render_feature_table(run.table);
  out.csv = feature_table_to_csv(run.table);
  out.json_str =
      with_provenance(cfg, json{{"table", feature_table_to_json(run.table)}})
          .dump(2);
  if (cfg.dump_shap) {
    out.shap_csv = shap_to_csv(run.shap, data.feature_names);
  }
  stamp(&out, cfg);
  return out;
}

RunOutput run_benchmark(const RunConfig& cfg) {
  Dataset data = load_dataset(cfg);
  BenchmarkConfig bench;
  bench.phi = phi_config_from(cfg, data.p());
  bench.replicates = cfg.replicates;
  bench.train_fraction = cfg.train_fraction;
  BackboneFactory backbone = backbone_factory(cfg.backbone, cfg, data);
  BackboneFactory backbone_b = backbone_factory(cfg.backbone_b, cfg, data);

  MetricsReport report = benchmark(data, backbone, backbone_b, bench);

  RunOutput out;
  out.text = render_metrics(report);
  out.csv = metrics_to_csv(report);
  out.json_str =
      with_provenance(cfg, json{{"benchmark", metrics_to_json(report)}}).dump(2);
  stamp(&out, cfg);
  return out;
}

RunOutput run_calibrate(const RunConfig& cfg) {
  CalibrationConfig cal;
  cal.replicates = cfg.replicates;
  cal.n = cfg.calibrate_n;
  cal.p = cfg.calibrate_p;
  cal.K = cfg.calibrate_k;
  cal.sigma = cfg.calibrate_sigma;
  cal.seed = cfg.seed;
  cal.alpha = cfg.alpha;
  SelectorSpec sel = parse_selector(cfg.selector);
  if (sel.kind == SelectorKind::kLarsK) {
    cal.selector = SelectorKind::kStepwiseK;  // calibration default
  } else {
    cal.selector = sel.kind;
    cal.lasso_lambda = sel.lambda;
  }

  RunOutput out;
  if (cfg.calibrate_mode == "null_p") {
    NullCalibrationResult r = calibrate_null_p(cal);
    out.text = render_null_calibration(r);
    out.json_str =
        with_provenance(cfg, json{{"null_p", null_calibration_to_json(r)}})
            .dump(2);
    out.status = r.pass ? 0 : 2;
  } else if (cfg.calibrate_mode == "coverage") {
    // A planted signal so the intervals have nonzero targets to cover.
    cal.beta = Vector::Zero(cal.p);
    for (int j = 0; j < std::min(cal.K, cal.p); ++j) {
      cal.beta(j) = (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + j);
    }
    CoverageResult r = calibrate_coverage(cal);
    out.text = render_coverage(r);
    out.json_str =
        with_provenance(cfg, json{{"coverage", coverage_to_json(r)}}).dump(2);
    out.status = r.pass ? 0 : 2;
  } else if (cfg.calibrate_mode == "naive_compare") {
    NaiveCompareResult r = calibrate_naive_compare(cal);
    out.text = render_naive_compare(r);
    out.json_str =
        with_provenance(cfg, json{{"naive_compare", naive_compare_to_json(r)}})
            .dump(2);
    out.status = r.pass ? 0 : 2;
  } else {
    throw std::invalid_argument(
        "unknown calibrate mode: " + cfg.calibrate_mode +
        " (expected null_p, coverage, or naive_compare)");
  }
  stamp(&out, cfg);
  return out;
}

RunOutput run_ablate(const RunConfig& cfg) {
  Dataset data = load_dataset(cfg);
  AblationConfig ab;
  ab.phi = phi_config_from(cfg, data.p());
  ab.replicates = cfg.replicates;
  ab.train_fraction = cfg.train_fraction;
  BackboneFactory backbone = backbone_factory(cfg.backbone, cfg, data);
  BackboneFactory backbone_b = backbone_factory(cfg.backbone_b, cfg, data);

  std::vector<MethodMetrics> rows =
      ablation_suite(data, backbone, backbone_b, ab);

  RunOutput out;
  out.text = render_method_rows(rows, "selection-step ablation");
  out.json_str =
      with_provenance(cfg, json{{"ablation", method_rows_to_json(rows)}}).dump(2);
  MetricsReport as_report;
  as_report.methods = rows;
  as_report.replicates = cfg.replicates;
  as_report.seed = cfg.seed;
  out.csv = metrics_to_csv(as_report);
  stamp(&out, cfg);
  return out;
}

RunOutput run_command(const std::string& command, const RunConfig& cfg) {
  if (command == "table") return run_table(cfg);
  if (command == "benchmark") return run_benchmark(cfg);
  if (command == "calibrate") return run_calibrate(cfg);
  if (command == "ablate") return run_ablate(cfg);
  throw std::invalid_argument(
      "unknown command: " + command +
      " (expected table, benchmark, calibrate, or ablate)");
}

}  // namespace phitest
