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

#include "phitest/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "phitest/rng.hpp"

namespace phitest {

namespace {

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double* out) {
  std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

constexpr double kAirQualitySentinel = -200.0;

}  // namespace

Recipe parse_recipe(const std::string& name) {
  std::string n = to_lower(name);
  if (n.empty() || n == "none") return Recipe::kNone;
  if (n == "airquality") return Recipe::kAirQuality;
  if (n == "concrete") return Recipe::kConcrete;
  throw std::invalid_argument("unknown preprocessing recipe: " + name);
}

std::string recipe_name(Recipe r) {
  switch (r) {
    case Recipe::kNone:
      return "none";
    case Recipe::kAirQuality:
      return "airquality";
    case Recipe::kConcrete:
      return "concrete";
  }
  return "none";
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 Recipe recipe) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty CSV file: " + path);
  }
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  std::vector<std::vector<std::string>> raw;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("CSV row with " + std::to_string(fields.size()) +
                               " fields, expected " +
                               std::to_string(header.size()));
    }
    raw.push_back(std::move(fields));
  }

  // Resolve the target column.
  std::string target = target_column;
  if (recipe == Recipe::kAirQuality) {
    target = "CO(GT)";
  } else if (recipe == Recipe::kConcrete && target.empty()) {
    for (const auto& h : header) {
      if (to_lower(h).find("compressive") != std::string::npos) {
        target = h;
        break;
      }
    }
    if (target.empty()) {
      throw std::runtime_error(
          "concrete recipe: no column name contains 'compressive'");
    }
  }
  if (target.empty()) {
    throw std::runtime_error("no target column given");
  }

  int target_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == target) target_col = static_cast<int>(j);
  }
  if (target_col < 0) {
    throw std::runtime_error("target column not found: " + target);
  }

  // Decide which columns survive as features.
  std::vector<int> feature_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) == target_col) continue;
    std::string lname = to_lower(header[j]);
    if (recipe == Recipe::kAirQuality &&
        (lname == "date" || lname == "time" || lname.empty())) {
      continue;
    }
    if (header[j].empty()) {
      throw std::runtime_error("CSV has an unnamed column");
    }
    feature_cols.push_back(static_cast<int>(j));
  }
  if (feature_cols.empty()) {
    throw std::runtime_error("dataset has no feature columns (p >= 1 required)");
  }

  // Reject non-numeric residue, naming every offending column once.
  std::set<std::string> bad_columns;
  std::vector<int> used_cols = feature_cols;
  used_cols.push_back(target_col);
  for (const auto& row : raw) {
    for (int j : used_cols) {
      double v = 0.0;
      if (!parse_double(row[static_cast<std::size_t>(j)], &v) ||
          !std::isfinite(v)) {
        bad_columns.insert(header[static_cast<std::size_t>(j)]);
      }
    }
  }
  if (!bad_columns.empty()) {
    std::string msg = "non-numeric values in columns:";
    for (const auto& c : bad_columns) msg += " " + c;
    throw std::runtime_error(msg);
  }

  // Row filter for the air-quality sentinel code.
  std::vector<int> kept_rows;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    bool keep = true;
    if (recipe == Recipe::kAirQuality) {
      for (int j : used_cols) {
        double v = 0.0;
        parse_double(raw[i][static_cast<std::size_t>(j)], &v);
        if (v == kAirQualitySentinel) {
          keep = false;
          break;
        }
      }
    }
    if (keep) kept_rows.push_back(static_cast<int>(i));
  }
  if (kept_rows.size() < 2) {
    throw std::runtime_error("fewer than 2 rows remain after filtering");
  }

  Dataset data;
  data.name = path;
  for (int j : feature_cols) data.feature_names.push_back(header[static_cast<std::size_t>(j)]);
  {
    std::set<std::string> uniq(data.feature_names.begin(),
                               data.feature_names.end());
    if (uniq.size() != data.feature_names.size()) {
      throw std::runtime_error("duplicate feature names in CSV header");
    }
  }
  data.X.resize(static_cast<int>(kept_rows.size()),
                static_cast<int>(feature_cols.size()));
  data.y.resize(static_cast<int>(kept_rows.size()));
  for (std::size_t r = 0; r < kept_rows.size(); ++r) {
    const auto& row = raw[static_cast<std::size_t>(kept_rows[r])];
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      double v = 0.0;
      parse_double(row[static_cast<std::size_t>(feature_cols[c])], &v);
      data.X(static_cast<int>(r), static_cast<int>(c)) = v;
    }
    double v = 0.0;
    parse_double(row[static_cast<std::size_t>(target_col)], &v);
    data.y(static_cast<int>(r)) = v;
  }
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  for (const auto& name : data.feature_names) out << name << ",";
  out << "target\n";
  char buf[64];
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.X(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", data.y(i));
    out << buf << "\n";
  }
}

SplitPlan make_split(int n, std::uint64_t seed, double train_fraction,
                     bool split_sample) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1]");
  }
  if (split_sample && n < 4) {
    throw std::invalid_argument("split-sample mode requires n >= 4");
  }
  SplitPlan plan;
  plan.seed = seed;
  plan.train_fraction = train_fraction;

  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(perm);

  int n_train = static_cast<int>(std::llround(train_fraction * n));
  n_train = std::clamp(n_train, 1, n);
  plan.train_idx.assign(perm.begin(), perm.begin() + n_train);
  plan.test_idx.assign(perm.begin() + n_train, perm.end());

  if (split_sample) {
    int n_sel = (n_train + 1) / 2;
    plan.selection_idx.assign(plan.train_idx.begin(),
                              plan.train_idx.begin() + n_sel);
    plan.inference_idx.assign(plan.train_idx.begin() + n_sel,
                              plan.train_idx.end());
  }
  return plan;
}

Matrix Standardizer::apply(const Matrix& X) const {
  Matrix Z = X;
  for (int j = 0; j < Z.cols(); ++j) {
    Z.col(j) = (Z.col(j).array() - means(j)) / scales(j);
  }
  return Z;
}

Matrix Standardizer::invert(const Matrix& Z) const {
  Matrix X = Z;
  for (int j = 0; j < X.cols(); ++j) {
    X.col(j) = X.col(j).array() * scales(j) + means(j);
  }
  return X;
}

Standardizer fit_standardizer(const Matrix& X) {
  if (X.rows() < 2) {
    throw std::invalid_argument("fit_standardizer requires n >= 2");
  }
  Standardizer s;
  int p = static_cast<int>(X.cols());
  s.means.resize(p);
  s.scales.resize(p);
  for (int j = 0; j < p; ++j) {
    double mean = X.col(j).mean();
    double var = (X.col(j).array() - mean).square().mean();
    double scale = std::sqrt(var);
    s.means(j) = mean;
    if (scale <= 0.0) {
      s.scales(j) = 1.0;
      s.constant_columns.push_back(j);
    } else {
      s.scales(j) = scale;
    }
  }
  return s;
}

Dataset synth_gaussian(int n, int p, const Vector& beta, double sigma,
                       std::uint64_t seed) {
  if (static_cast<int>(beta.size()) != p) {
    throw std::invalid_argument("synth_gaussian: |beta| must equal p");
  }
  if (sigma < 0.0) {
    throw std::invalid_argument("synth_gaussian: sigma must be >= 0");
  }
  Dataset data;
  data.name = "synth";
  Rng rng(seed);
  data.X.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) data.X(i, j) = rng.normal();
  }
  data.y = data.X * beta;
  for (int i = 0; i < n; ++i) data.y(i) += sigma * rng.normal();
  for (int j = 0; j < p; ++j) {
    data.feature_names.push_back("x" + std::to_string(j + 1));
  }
  return data;
}

Matrix take_rows(const Matrix& X, std::span<const int> idx) {
  Matrix out(static_cast<int>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<int>(i)) = X.row(idx[i]);
  }
  return out;
}

Vector take_rows(const Vector& v, std::span<const int> idx) {
  Vector out(static_cast<int>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(static_cast<int>(i)) = v(idx[i]);
  }
  return out;
}

Matrix take_cols(const Matrix& X, std::span<const int> idx) {
  Matrix out(X.rows(), static_cast<int>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.col(static_cast<int>(j)) = X.col(idx[j]);
  }
  return out;
}

}  // namespace phitest
