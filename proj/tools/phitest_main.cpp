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

// Command-line front end. Everything statistical happens behind the shared
// library's C interface; this file only collects flags, merges the optional
// key=value config file, and writes the returned artifacts.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "phitest/c_api.h"

namespace {

using nlohmann::json;

// Flat key=value file, '#' comments. CLI flags take precedence over file
// values, which take precedence over defaults.
json parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  json out = json::object();
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      std::size_t b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    // Keep numbers as numbers so the JSON config stays typed.
    char* end = nullptr;
    double num = std::strtod(value.c_str(), &end);
    if (end == value.c_str() + value.size() && !value.empty()) {
      if (num == static_cast<long long>(num)) {
        out[key] = static_cast<long long>(num);
      } else {
        out[key] = num;
      }
    } else if (value == "true" || value == "false") {
      out[key] = value == "true";
    } else {
      out[key] = value;
    }
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write output file: " + path);
  }
  out << content;
}

struct CliOptions {
  std::string config_file;
  std::string out_json;
  std::string out_csv;
  std::string dump_shap;
  json flags = json::object();
};

void add_shared_flags(CLI::App* cmd, CliOptions& opt) {
  auto bind_str = [&opt, cmd](const std::string& flag, const std::string& key,
                              const std::string& desc) {
    auto holder = std::make_shared<std::string>();
    cmd->add_option_function<std::string>(
           flag,
           [&opt, key](const std::string& v) { opt.flags[key] = v; }, desc)
        ->type_name("TEXT");
    (void)holder;
  };
  auto bind_int = [&opt, cmd](const std::string& flag, const std::string& key,
                              const std::string& desc) {
    cmd->add_option_function<std::int64_t>(
           flag, [&opt, key](std::int64_t v) { opt.flags[key] = v; }, desc)
        ->type_name("INT");
  };
  auto bind_double = [&opt, cmd](const std::string& flag,
                                 const std::string& key,
                                 const std::string& desc) {
    cmd->add_option_function<double>(
           flag, [&opt, key](double v) { opt.flags[key] = v; }, desc)
        ->type_name("FLOAT");
  };

  bind_str("--data", "data", "dataset CSV (header row, comma separated)");
  bind_str("--recipe", "recipe", "preprocessing recipe: none|airquality|concrete");
  bind_str("--target", "target", "target column (recipes may imply it)");
  bind_str("--backbone", "backbone",
           "linear|gbt|gbt-shallow|external:<path>|saved:<path>");
  bind_str("--backbone-b", "backbone_b", "second backbone for robustness");
  bind_str("--engine", "engine", "attribution engine: exact|kernel");
  bind_str("--selector", "selector", "lars|stepwise|lasso:<lambda>");
  bind_str("--mode", "mode", "inference mode: full|split");
  bind_int("-M,--screen-budget", "screen_budget", "screening budget M (0 = default)");
  bind_int("-K,--max-selected", "max_selected", "selection size K");
  bind_double("--alpha", "alpha", "confidence level alpha");
  bind_int("--seed", "seed", "master seed (all randomness derives from it)");
  bind_int("--replicates", "replicates", "replicates for stability/calibration");
  bind_double("--train-fraction", "train_fraction", "train split fraction");
  bind_int("--background-size", "background_size", "attribution background rows");
  bind_int("--shap-row-cap", "shap_row_cap", "cap on attributed rows (0 = all)");
  bind_int("--kernel-coalitions", "kernel_coalitions",
           "sampled coalitions (0 = all)");
  bind_int("--gbt-trees", "gbt_trees", "boosted trees per backbone");
  bind_int("--gbt-depth", "gbt_depth", "tree depth");
  bind_double("--gbt-learning-rate", "gbt_learning_rate", "boosting step size");
  bind_int("--gbt-min-leaf", "gbt_min_leaf", "minimum rows per leaf");
  bind_double("--linear-ridge", "linear_ridge", "ridge for the linear backbone");
  bind_str("--save-model", "save_model", "write the fitted backbone to a file");

  cmd->add_option("--config", opt.config_file,
                  "key=value config file (flags take precedence)");
  cmd->add_option("--out-json", opt.out_json, "write the JSON mirror here");
  cmd->add_option("--out-csv", opt.out_csv, "write the CSV rendering here");
  cmd->add_option("--dump-shap", opt.dump_shap,
                  "write per-sample attributions (CSV) here");
}

int run(const std::string& command, CliOptions& opt) {
  json config = json::object();
  if (!opt.config_file.empty()) {
    config = parse_config_file(opt.config_file);
  }
  for (auto& [key, value] : opt.flags.items()) config[key] = value;
  if (!opt.dump_shap.empty()) config["dump_shap"] = true;

  phitest_result_handle result = nullptr;
  if (phitest_run(command.c_str(), config.dump().c_str(), &result) != 0) {
    std::cerr << "phitest: " << phitest_last_error() << "\n";
    return 1;
  }

  const char* text = nullptr;
  phitest_result_text(result, &text);
  std::cout << text;

  int status = 0;
  phitest_result_status(result, &status);

  try {
    if (!opt.out_json.empty()) {
      const char* s = nullptr;
      phitest_result_json(result, &s);
      write_file(opt.out_json, s);
    }
    if (!opt.out_csv.empty()) {
      const char* s = nullptr;
      phitest_result_csv(result, &s);
      write_file(opt.out_csv, s);
    }
    if (!opt.dump_shap.empty()) {
      const char* s = nullptr;
      phitest_result_shap_csv(result, &s);
      write_file(opt.dump_shap, s);
    }
  } catch (const std::exception& e) {
    std::cerr << "phitest: " << e.what() << "\n";
    phitest_result_free(result);
    return 1;
  }
  phitest_result_free(result);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(phitest_version()) +
               " - global feature selection and post-selection inference "
               "for black-box regressors"};
  app.require_subcommand(1);

  CliOptions table_opt, bench_opt, cal_opt, ablate_opt;

  CLI::App* table = app.add_subcommand(
      "table", "global feature-importance table with selective inference");
  add_shared_flags(table, table_opt);

  CLI::App* bench = app.add_subcommand(
      "benchmark", "fidelity/sparsity/stability/robustness across methods");
  add_shared_flags(bench, bench_opt);

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "simulation checks of the selective-inference layer");
  add_shared_flags(calibrate, cal_opt);
  calibrate->add_option_function<std::string>(
      "--calibrate-mode",
      [&cal_opt](const std::string& v) { cal_opt.flags["calibrate_mode"] = v; },
      "null_p|coverage|naive_compare");
  calibrate->add_option_function<std::int64_t>(
      "--calibrate-n",
      [&cal_opt](std::int64_t v) { cal_opt.flags["calibrate_n"] = v; },
      "simulated sample size");
  calibrate->add_option_function<std::int64_t>(
      "--calibrate-p",
      [&cal_opt](std::int64_t v) { cal_opt.flags["calibrate_p"] = v; },
      "simulated feature count");
  calibrate->add_option_function<std::int64_t>(
      "--calibrate-k",
      [&cal_opt](std::int64_t v) { cal_opt.flags["calibrate_k"] = v; },
      "selection size in the simulation");
  calibrate->add_option_function<double>(
      "--calibrate-sigma",
      [&cal_opt](double v) { cal_opt.flags["calibrate_sigma"] = v; },
      "noise level in the simulation");

  CLI::App* ablate = app.add_subcommand(
      "ablate", "selection-step ablation (lasso/stepwise variants)");
  add_shared_flags(ablate, ablate_opt);

  CLI11_PARSE(app, argc, argv);

  if (table->parsed()) return run("table", table_opt);
  if (bench->parsed()) return run("benchmark", bench_opt);
  if (calibrate->parsed()) return run("calibrate", cal_opt);
  if (ablate->parsed()) return run("ablate", ablate_opt);
  return 1;
}
