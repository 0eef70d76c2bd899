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

#include "phitest/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace phitest {

const char* kVersion = "phitest 0.1.0";

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json number_or_tag(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double number_from_tag(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

std::string pad_left(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return s + std::string(width - s.size(), ' ');
}

std::string ci_string(double lo, double hi) {
  auto one = [](double v) {
    if (v == -kInf) return std::string("-inf");
    if (v == kInf) return std::string("inf");
    return fixed4(v);
  };
  return "[" + one(lo) + ", " + one(hi) + "]";
}

std::string mode_tag(InferenceMode mode) {
  switch (mode) {
    case InferenceMode::kTruncatedNormal:
      return "truncated_normal";
    case InferenceMode::kSplitT:
      return "split_t";
    case InferenceMode::kNaive:
      return "naive";
  }
  return "split_t";
}

InferenceMode mode_from_tag(const std::string& tag) {
  if (tag == "truncated_normal") return InferenceMode::kTruncatedNormal;
  if (tag == "naive") return InferenceMode::kNaive;
  return InferenceMode::kSplitT;
}

json summary_to_json(const SelectiveSummary& s) {
  return json{{"observed", s.observed},
              {"coef", s.theta_hat},
              {"se", s.scale},
              {"stat", s.stat},
              {"p_value", s.p_value},
              {"ci_low", number_or_tag(s.ci_low)},
              {"ci_high", number_or_tag(s.ci_high)},
              {"alpha", s.alpha},
              {"mode", mode_tag(s.mode)}};
}

SelectiveSummary summary_from_json(const json& j) {
  SelectiveSummary s;
  s.observed = j.at("observed").get<double>();
  s.theta_hat = j.at("coef").get<double>();
  s.scale = j.at("se").get<double>();
  s.stat = j.at("stat").get<double>();
  s.p_value = j.at("p_value").get<double>();
  s.ci_low = number_from_tag(j.at("ci_low"));
  s.ci_high = number_from_tag(j.at("ci_high"));
  s.alpha = j.at("alpha").get<double>();
  s.mode = mode_from_tag(j.at("mode").get<std::string>());
  return s;
}

std::string fidelity_string(const FidelityResult& fid) {
  return fid.defined ? fixed4(fid.fidelity_pct) : "undefined";
}

}  // namespace

std::string fixed4(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 4);
  return std::string(buf, res.ptr);
}

json run_config_to_json(const RunConfig& c) {
  return json{{"data", c.data_path},
              {"recipe", c.recipe},
              {"target", c.target},
              {"backbone", c.backbone},
              {"backbone_b", c.backbone_b},
              {"engine", c.engine},
              {"selector", c.selector},
              {"mode", c.mode},
              {"screen_budget", c.screen_budget},
              {"max_selected", c.max_selected},
              {"alpha", c.alpha},
              {"seed", c.seed},
              {"replicates", c.replicates},
              {"train_fraction", c.train_fraction},
              {"background_size", c.background_size},
              {"shap_row_cap", c.shap_row_cap},
              {"kernel_coalitions", c.kernel_coalitions},
              {"gbt_trees", c.gbt_trees},
              {"gbt_depth", c.gbt_depth},
              {"gbt_learning_rate", c.gbt_learning_rate},
              {"gbt_min_leaf", c.gbt_min_leaf},
              {"linear_ridge", c.linear_ridge},
              {"calibrate_mode", c.calibrate_mode},
              {"calibrate_n", c.calibrate_n},
              {"calibrate_p", c.calibrate_p},
              {"calibrate_k", c.calibrate_k},
              {"calibrate_sigma", c.calibrate_sigma},
              {"dump_shap", c.dump_shap},
              {"save_model", c.save_model}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      field = j.at(key).get<std::decay_t<decltype(field)>>();
    }
  };
  get("data", c.data_path);
  get("recipe", c.recipe);
  get("target", c.target);
  get("backbone", c.backbone);
  get("backbone_b", c.backbone_b);
  get("engine", c.engine);
  get("selector", c.selector);
  get("mode", c.mode);
  get("screen_budget", c.screen_budget);
  get("max_selected", c.max_selected);
  get("alpha", c.alpha);
  get("seed", c.seed);
  get("replicates", c.replicates);
  get("train_fraction", c.train_fraction);
  get("background_size", c.background_size);
  get("shap_row_cap", c.shap_row_cap);
  get("kernel_coalitions", c.kernel_coalitions);
  get("gbt_trees", c.gbt_trees);
  get("gbt_depth", c.gbt_depth);
  get("gbt_learning_rate", c.gbt_learning_rate);
  get("gbt_min_leaf", c.gbt_min_leaf);
  get("linear_ridge", c.linear_ridge);
  get("calibrate_mode", c.calibrate_mode);
  get("calibrate_n", c.calibrate_n);
  get("calibrate_p", c.calibrate_p);
  get("calibrate_k", c.calibrate_k);
  get("calibrate_sigma", c.calibrate_sigma);
  get("dump_shap", c.dump_shap);
  get("save_model", c.save_model);
  return c;
}

SelectorSpec parse_selector(const std::string& spec) {
  if (spec == "lars") return {SelectorKind::kLarsK, 0.0};
  if (spec == "stepwise") return {SelectorKind::kStepwiseK, 0.0};
  if (spec.rfind("lasso:", 0) == 0) {
    double lambda = std::strtod(spec.c_str() + 6, nullptr);
    if (!(lambda > 0.0)) {
      throw std::invalid_argument("selector lasso:<lambda> needs lambda > 0");
    }
    return {SelectorKind::kLassoLambda, lambda};
  }
  throw std::invalid_argument("unknown selector: " + spec +
                              " (expected lars, stepwise, or lasso:<lambda>)");
}

EngineKind parse_engine(const std::string& name) {
  if (name == "exact") return EngineKind::kExact;
  if (name == "kernel") return EngineKind::kKernel;
  throw std::invalid_argument("unknown engine: " + name);
}

PipelineMode parse_mode(const std::string& name) {
  if (name == "full") return PipelineMode::kFull;
  if (name == "split") return PipelineMode::kSplit;
  throw std::invalid_argument("unknown mode: " + name);
}

PhiTestConfig phi_config_from(const RunConfig& cfg, int p) {
  PhiTestConfig out;
  out.screen_budget = cfg.screen_budget > 0 ? cfg.screen_budget
                                            : default_screen_budget(p);
  out.max_selected = cfg.max_selected;
  out.selector = parse_selector(cfg.selector);
  out.engine = parse_engine(cfg.engine);
  out.alpha = cfg.alpha;
  out.mode = parse_mode(cfg.mode);
  out.background_size = cfg.background_size;
  out.shap_row_cap = cfg.shap_row_cap;
  out.kernel_coalitions = cfg.kernel_coalitions;
  out.seed = cfg.seed;
  return out;
}

std::string render_feature_table(const FeatureTable& table) {
  // Selected rows in descending attribution order, then the residual line,
  // then the unselected features.
  std::vector<const FeatureRow*> selected, unselected;
  for (const FeatureRow& row : table.rows) {
    (row.selected ? selected : unselected).push_back(&row);
  }
  auto by_score = [](const FeatureRow* a, const FeatureRow* b) {
    if (a->shap_score != b->shap_score) return a->shap_score > b->shap_score;
    return a->name < b->name;
  };
  std::sort(selected.begin(), selected.end(), by_score);
  std::sort(unselected.begin(), unselected.end(), by_score);

  const std::string residual_name = "Residual (unselected)";
  std::size_t name_w = residual_name.size();
  for (const FeatureRow& row : table.rows) {
    name_w = std::max(name_w, row.name.size());
  }
  const std::size_t num_w = 9;
  const std::size_t p_w = 9;

  std::ostringstream out;
  out << pad_right("Feature", name_w) << "  " << pad_left("SHAP", num_w) << "  "
      << pad_left("Coef", num_w) << "  " << pad_left("SE", num_w) << "  "
      << pad_left("z", num_w) << "  " << pad_left("p-value", p_w) << "  "
      << "95% CI" << "\n";

  auto emit = [&](const std::string& name, const std::string& shap,
                  const std::string& coef, const std::string& se,
                  const std::string& stat, const std::string& p,
                  const std::string& ci) {
    out << pad_right(name, name_w) << "  " << pad_left(shap, num_w) << "  "
        << pad_left(coef, num_w) << "  " << pad_left(se, num_w) << "  "
        << pad_left(stat, num_w) << "  " << pad_left(p, p_w) << "  " << ci
        << "\n";
  };

  for (const FeatureRow* row : selected) {
    const SelectiveSummary& s = *row->inference;
    emit(row->name, fixed4(row->shap_score), fixed4(s.theta_hat),
         fixed4(s.scale), fixed4(s.stat), fixed4(s.p_value),
         ci_string(s.ci_low, s.ci_high));
  }
  emit(residual_name, fixed4(table.residual_score), "--", "--", "--", "--",
       "[--, --]");
  for (const FeatureRow* row : unselected) {
    emit(row->name, fixed4(row->shap_score), "--", "--", "--", "--",
         "[--, --]");
  }

  out << "\n"
      << "mode=" << mode_name(table.mode) << " selector=" << table.selector
      << " engine=" << table.engine << " M=" << table.screen_budget
      << " K=" << table.max_selected << " alpha=" << fixed4(table.alpha)
      << " seed=" << table.seed << "\n";
  if (table.path_truncated) {
    out << "note: selection path ended before K variables entered\n";
  }
  return out.str();
}

std::string feature_table_to_csv(const FeatureTable& table) {
  std::ostringstream out;
  out << "feature,shap,selected,coef,se,stat,p_value,ci_low,ci_high\n";
  auto field = [](double v) { return fixed4(v); };
  for (const FeatureRow& row : table.rows) {
    out << row.name << "," << field(row.shap_score) << ","
        << (row.selected ? 1 : 0) << ",";
    if (row.inference) {
      const SelectiveSummary& s = *row.inference;
      out << field(s.theta_hat) << "," << field(s.scale) << ","
          << field(s.stat) << "," << field(s.p_value) << "," << field(s.ci_low)
          << "," << field(s.ci_high);
    } else {
      out << ",,,,,";
    }
    out << "\n";
  }
  out << "Residual (unselected)," << field(table.residual_score)
      << ",0,,,,,,\n";
  return out.str();
}

json feature_table_to_json(const FeatureTable& table) {
  json rows = json::array();
  for (const FeatureRow& row : table.rows) {
    json r{{"name", row.name},
           {"shap", row.shap_score},
           {"selected", row.selected},
           {"entry_rank", row.entry_rank}};
    if (row.inference) r["inference"] = summary_to_json(*row.inference);
    if (row.naive) r["naive"] = summary_to_json(*row.naive);
    rows.push_back(std::move(r));
  }
  return json{{"rows", rows},
              {"residual_shap", table.residual_score},
              {"mode", mode_name(table.mode)},
              {"alpha", table.alpha},
              {"screened", table.screened},
              {"selected", table.selected},
              {"seed", table.seed},
              {"selector", table.selector},
              {"engine", table.engine},
              {"screen_budget", table.screen_budget},
              {"max_selected", table.max_selected},
              {"selection_rows", table.selection_rows},
              {"inference_rows", table.inference_rows},
              {"path_truncated", table.path_truncated}};
}

FeatureTable feature_table_from_json(const json& j) {
  FeatureTable table;
  for (const auto& r : j.at("rows")) {
    FeatureRow row;
    row.name = r.at("name").get<std::string>();
    row.shap_score = r.at("shap").get<double>();
    row.selected = r.at("selected").get<bool>();
    row.entry_rank = r.at("entry_rank").get<int>();
    if (r.contains("inference")) row.inference = summary_from_json(r.at("inference"));
    if (r.contains("naive")) row.naive = summary_from_json(r.at("naive"));
    table.rows.push_back(std::move(row));
  }
  table.residual_score = j.at("residual_shap").get<double>();
  table.mode = parse_mode(j.at("mode").get<std::string>());
  table.alpha = j.at("alpha").get<double>();
  table.screened = j.at("screened").get<std::vector<int>>();
  table.selected = j.at("selected").get<std::vector<int>>();
  table.seed = j.at("seed").get<std::uint64_t>();
  table.selector = j.at("selector").get<std::string>();
  table.engine = j.at("engine").get<std::string>();
  table.screen_budget = j.at("screen_budget").get<int>();
  table.max_selected = j.at("max_selected").get<int>();
  table.selection_rows = j.at("selection_rows").get<int>();
  table.inference_rows = j.at("inference_rows").get<int>();
  table.path_truncated = j.at("path_truncated").get<bool>();
  return table;
}

namespace {

std::string render_rows_table(const std::vector<MethodMetrics>& rows) {
  std::size_t name_w = 10;
  for (const auto& m : rows) name_w = std::max(name_w, m.method.size());
  std::ostringstream out;
  out << pad_right("Method", name_w) << "  " << pad_left("Fidelity(%)", 12)
      << "  " << pad_left("Sparsity", 8) << "  " << pad_left("Stability", 9)
      << "  " << pad_left("Robustness", 10) << "\n";
  for (const auto& m : rows) {
    out << pad_right(m.method, name_w) << "  "
        << pad_left(fidelity_string(m.fid), 12) << "  "
        << pad_left(std::to_string(m.sparsity), 8) << "  "
        << pad_left(fixed4(m.stability), 9) << "  "
        << pad_left(fixed4(m.robustness), 10) << "\n";
  }
  return out.str();
}

json rows_to_json(const std::vector<MethodMetrics>& rows) {
  json arr = json::array();
  for (const auto& m : rows) {
    arr.push_back(json{{"method", m.method},
                       {"fidelity_pct", number_or_tag(m.fid.fidelity_pct)},
                       {"r2_full", m.fid.r2_full},
                       {"r2_selected", m.fid.r2_selected},
                       {"fidelity_defined", m.fid.defined},
                       {"sparsity", m.sparsity},
                       {"stability", m.stability},
                       {"robustness", m.robustness},
                       {"selected", m.selected}});
  }
  return arr;
}

}  // namespace

std::string render_metrics(const MetricsReport& report) {
  std::ostringstream out;
  out << render_rows_table(report.methods);
  out << "\nreplicates=" << report.replicates << " seed=" << report.seed
      << "\n";
  return out.str();
}

std::string metrics_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "method,fidelity_pct,sparsity,stability,robustness\n";
  for (const auto& m : report.methods) {
    out << m.method << "," << fidelity_string(m.fid) << "," << m.sparsity
        << "," << fixed4(m.stability) << "," << fixed4(m.robustness) << "\n";
  }
  return out.str();
}

json metrics_to_json(const MetricsReport& report) {
  return json{{"methods", rows_to_json(report.methods)},
              {"replicates", report.replicates},
              {"seed", report.seed}};
}

std::string render_method_rows(const std::vector<MethodMetrics>& rows,
                               const std::string& title) {
  std::ostringstream out;
  out << title << "\n" << render_rows_table(rows);
  return out.str();
}

json method_rows_to_json(const std::vector<MethodMetrics>& rows) {
  return rows_to_json(rows);
}

std::string render_null_calibration(const NullCalibrationResult& r) {
  std::ostringstream out;
  out << "null calibration over " << r.replicates << " selected replicates\n";
  out << pad_left("level", 8) << "  " << pad_left("empirical", 10) << "  "
      << pad_left("band", 18) << "\n";
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    out << pad_left(fixed4(r.levels[i]), 8) << "  "
        << pad_left(fixed4(r.exceedance[i]), 10) << "  "
        << pad_left("[" + fixed4(r.band_low[i]) + ", " + fixed4(r.band_high[i]) + "]",
                    18)
        << "\n";
  }
  out << "KS statistic vs U(0,1): " << fixed4(r.ks_statistic) << "\n";
  out << (r.pass ? "PASS" : "FAIL") << ": all levels within +-2 binomial SD\n";
  return out.str();
}

std::string render_coverage(const CoverageResult& r) {
  std::ostringstream out;
  out << "selective CI coverage: " << fixed4(r.coverage) << " over "
      << r.intervals << " intervals (target " << fixed4(r.target)
      << ", threshold " << fixed4(r.threshold) << ")\n";
  out << (r.pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

std::string render_naive_compare(const NaiveCompareResult& r) {
  std::ostringstream out;
  out << "null exceedance at level " << fixed4(r.level) << " over "
      << r.replicates << " replicates\n";
  out << "  naive (same data): " << fixed4(r.naive_exceedance) << "\n";
  out << "  split-sample:      " << fixed4(r.split_exceedance) << "\n";
  out << (r.pass ? "PASS" : "FAIL")
      << ": naive > 0.08 and split within [0.035, 0.065]\n";
  return out.str();
}

json null_calibration_to_json(const NullCalibrationResult& r) {
  return json{{"levels", r.levels},
              {"exceedance", r.exceedance},
              {"band_low", r.band_low},
              {"band_high", r.band_high},
              {"replicates", r.replicates},
              {"ks_statistic", r.ks_statistic},
              {"pass", r.pass}};
}

json coverage_to_json(const CoverageResult& r) {
  return json{{"coverage", r.coverage},
              {"intervals", r.intervals},
              {"target", r.target},
              {"threshold", r.threshold},
              {"pass", r.pass}};
}

json naive_compare_to_json(const NaiveCompareResult& r) {
  return json{{"naive_exceedance", r.naive_exceedance},
              {"split_exceedance", r.split_exceedance},
              {"level", r.level},
              {"replicates", r.replicates},
              {"pass", r.pass}};
}

}  // namespace phitest
