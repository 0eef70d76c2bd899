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

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "phitest/dataset.hpp"
#include "phitest/rng.hpp"
#include "phitest/selection.hpp"
#include "phitest/selinf.hpp"
#include "phitest/stats_math.hpp"

using namespace phitest;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("normal and t distribution helpers agree with reference values") {
  CHECK(norm_cdf(1.96) == doctest::Approx(0.9750021049).epsilon(1e-9));
  CHECK(norm_quantile(0.975) == doctest::Approx(1.9599639845).epsilon(1e-8));
  CHECK(norm_sf(0.0) == doctest::Approx(0.5));
  // Far-tail reference values (mpmath, 40+ digits) on both sides of the
  // internal erfc/continued-fraction switch at z = 35.
  CHECK(log_norm_sf(40.0) ==
        doctest::Approx(-804.608442013754).epsilon(1e-10));
  CHECK(log_norm_sf(34.9999) ==
        doctest::Approx(-616.971598414421).epsilon(1e-12));
  CHECK(log_norm_sf(35.0001) ==
        doctest::Approx(-616.978604119416).epsilon(1e-12));
  CHECK(log_norm_sf(50.0) ==
        doctest::Approx(-1254.83136113942).epsilon(1e-12));

  // Student-t reference quantiles.
  CHECK(student_t_quantile(0.975, 10) == doctest::Approx(2.228138852).epsilon(1e-7));
  CHECK(student_t_quantile(0.975, 100) == doctest::Approx(1.983971519).epsilon(1e-7));
  CHECK(student_t_cdf(2.015048373, 5) == doctest::Approx(0.95).epsilon(1e-7));
}

TEST_CASE("truncation bounds: empty polyhedron means no truncation") {
  Matrix A(0, 4);
  Vector b(0);
  Vector v = Vector::Ones(4);
  Vector y = Vector::Ones(4);
  TruncationInterval iv = truncation_bounds(A, b, v, y);
  CHECK(iv.lower == -kInf);
  CHECK(iv.upper == kInf);
  CHECK(iv.feasible);
}

TEST_CASE("truncation bounds: one half-space along a unit contrast") {
  Vector v(3);
  v << 1, 0, 0;  // unit norm
  Matrix A(1, 3);
  A.row(0) = v.transpose();
  Vector b(1);
  b << 5;
  Vector y(3);
  y << 3, 7, -2;  // v^T y = 3 <= 5
  TruncationInterval iv = truncation_bounds(A, b, v, y);
  CHECK(iv.upper == doctest::Approx(5.0));
  CHECK(iv.lower == -kInf);
}

TEST_CASE("truncation bounds require the observed point inside") {
  Matrix A(1, 2);
  A << 1, 0;
  Vector b(1);
  b << -10;
  Vector v(2);
  v << 1, 0;
  Vector y(2);
  y << 0, 0;  // A y = 0 > -10 is violated
  CHECK_THROWS(truncation_bounds(A, b, v, y));
}

TEST_CASE("line scan along the contrast matches the interval") {
  Dataset data = synth_gaussian(30, 4, Vector::Zero(4), 1.0, 61);
  Rng rng(62);
  Vector y(30);
  for (int i = 0; i < 30; ++i) y(i) = rng.normal();
  SelectionOutcome sel = stepwise_first_k(data.X, y, 2);

  Vector v = sel.contrasts.row(0).transpose();
  TruncationInterval iv = truncation_bounds(sel.A, sel.b, v, y);
  double t_obs = v.dot(y);
  CHECK(t_obs >= iv.lower - 1e-9);
  CHECK(t_obs <= iv.upper + 1e-9);

  Vector c = v / v.squaredNorm();
  Vector w = y - c * t_obs;
  double lo = std::isfinite(iv.lower) ? iv.lower - 2.0 : t_obs - 5.0;
  double hi = std::isfinite(iv.upper) ? iv.upper + 2.0 : t_obs + 5.0;
  for (int g = 0; g <= 1000; ++g) {
    double t = lo + (hi - lo) * g / 1000.0;
    Vector yt = w + c * t;
    bool member = ((sel.A * yt - sel.b).array() <= 1e-12).all();
    bool inside = t >= iv.lower - 1e-9 && t <= iv.upper + 1e-9;
    if (member != inside) {
      // Within tolerance of an endpoint both answers are acceptable.
      bool near_edge = std::fabs(t - iv.lower) < 1e-7 ||
                       std::fabs(t - iv.upper) < 1e-7;
      CHECK(near_edge);
    }
  }
}

TEST_CASE("tn_cdf reduces to the normal CDF without truncation") {
  for (double t : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
    CHECK(tn_cdf(t, 0.5, 2.0, -kInf, kInf) ==
          doctest::Approx(norm_cdf((t - 0.5) / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("tn_cdf symmetry and complementarity") {
  CHECK(tn_cdf(0.0, 0.0, 1.0, -1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  for (double t : {2.1, 2.5, 2.9}) {
    double c = tn_cdf(t, 0.0, 1.0, 2.0, 3.0);
    double s = tn_sf(t, 0.0, 1.0, 2.0, 3.0);
    CHECK(c + s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("tn_cdf far-tail values stay relatively accurate") {
  // 60-digit reference values (mpmath) for intervals deep in the tail.
  CHECK(tn_cdf(2.5, 0.0, 1.0, 2.0, 3.0) ==
        doctest::Approx(0.772910552609058).epsilon(1e-12));
  CHECK(tn_cdf(10.5, 0.0, 1.0, 10.0, 12.0) ==
        doctest::Approx(0.994331903610905).epsilon(1e-11));
  CHECK(tn_cdf(30.5, 0.0, 1.0, 30.0, 32.0) ==
        doctest::Approx(0.999999734458146).epsilon(1e-11));
}

TEST_CASE("tn_cdf is monotone in t and in the mean") {
  Rng rng(63);
  for (int trial = 0; trial < 50; ++trial) {
    double mu = 4.0 * rng.normal();
    double tau = 0.2 + 2.0 * rng.uniform();
    double a = mu + tau * (rng.uniform() * 6.0 - 3.0);
    double b = a + tau * (0.1 + 3.0 * rng.uniform());
    double prev = -1.0;
    for (int g = 0; g <= 20; ++g) {
      double t = a + (b - a) * g / 20.0;
      double c = tn_cdf(t, mu, tau, a, b);
      CHECK(c >= prev - 1e-12);
      prev = c;
    }
    double t_mid = 0.5 * (a + b);
    double up = tn_cdf(t_mid, mu + 0.5 * tau, tau, a, b);
    double down = tn_cdf(t_mid, mu, tau, a, b);
    CHECK(up <= down + 1e-12);
  }
}

TEST_CASE("tn_cdf rejects a numerically empty interval") {
  CHECK_THROWS_WITH_AS(tn_cdf(40.5, 0.0, 1.0, 40.0, 41.0),
                       doctest::Contains("numerically empty"),
                       std::runtime_error);
  // The log-space tails remain available there.
  double lc = tn_log_cdf(40.5, 0.0, 1.0, 40.0, 41.0);
  CHECK(std::isfinite(lc));
}

TEST_CASE("selective_p special cases") {
  TruncationInterval open{-kInf, kInf, true};
  double p = selective_p(1.96, 1.0, open, 0.0, Sided::kTwo);
  CHECK(p == doctest::Approx(0.05).epsilon(1e-3));

  TruncationInterval cut{2.0, 7.0, true};
  CHECK(selective_p(2.0, 1.0, cut, 0.0, Sided::kGreater) ==
        doctest::Approx(1.0));
  CHECK(selective_p(7.0, 1.0, cut, 0.0, Sided::kLess) == doctest::Approx(1.0));
}

TEST_CASE("selective_ci matches the classical interval without truncation") {
  TruncationInterval open{-kInf, kInf, true};
  double T = 1.3, tau = 0.7, alpha = 0.05;
  auto [lo, hi] = selective_ci(T, tau, open, alpha);
  double z = norm_quantile(1.0 - alpha / 2.0);
  CHECK(lo == doctest::Approx(T - z * tau).epsilon(1e-6));
  CHECK(hi == doctest::Approx(T + z * tau).epsilon(1e-6));
}

TEST_CASE("selective_ci endpoints invert the tail tests") {
  TruncationInterval iv{-0.5, 4.0, true};
  double T = 1.2, tau = 0.8, alpha = 0.1;
  auto [lo, hi] = selective_ci(T, tau, iv, alpha);
  REQUIRE(std::isfinite(lo));
  REQUIRE(std::isfinite(hi));
  CHECK(selective_p(T, tau, iv, lo, Sided::kGreater) ==
        doctest::Approx(alpha / 2.0).epsilon(1e-6));
  CHECK(selective_p(T, tau, iv, hi, Sided::kLess) ==
        doctest::Approx(alpha / 2.0).epsilon(1e-6));
}

TEST_CASE("split-sample t inference on a known system") {
  Dataset data = synth_gaussian(120, 3, Vector::Zero(3), 1.0, 67);
  Rng rng(68);
  Vector beta(3);
  beta << 0.8, 0, -0.3;
  Vector y = data.X * beta;
  for (int i = 0; i < 120; ++i) y(i) += 0.5 * rng.normal();

  auto rows = split_t_inference(data.X, y, 0.05);
  REQUIRE(rows.size() == 3);

  // Independent reference: normal equations plus the frozen t quantile.
  Matrix A(120, 4);
  A.col(0).setOnes();
  A.rightCols(3) = data.X;
  Matrix gram_inv = (A.transpose() * A).inverse();
  Vector coef = gram_inv * (A.transpose() * y);
  double rss = (y - A * coef).squaredNorm();
  double sigma2 = rss / (120 - 3 - 1);
  for (int j = 0; j < 3; ++j) {
    double se = std::sqrt(sigma2 * gram_inv(j + 1, j + 1));
    CHECK(rows[static_cast<std::size_t>(j)].theta_hat ==
          doctest::Approx(coef(j + 1)).epsilon(1e-9));
    CHECK(rows[static_cast<std::size_t>(j)].scale ==
          doctest::Approx(se).epsilon(1e-9));
    double q = student_t_quantile(0.975, 116);
    CHECK(rows[static_cast<std::size_t>(j)].ci_low ==
          doctest::Approx(coef(j + 1) - q * se).epsilon(1e-8));
    CHECK(rows[static_cast<std::size_t>(j)].ci_high ==
          doctest::Approx(coef(j + 1) + q * se).epsilon(1e-8));
    CHECK(rows[static_cast<std::size_t>(j)].ci_low <=
          rows[static_cast<std::size_t>(j)].theta_hat);
    CHECK(rows[static_cast<std::size_t>(j)].ci_high >=
          rows[static_cast<std::size_t>(j)].theta_hat);
  }
}

TEST_CASE("an exact fit is a degenerate inference problem") {
  Matrix X(4, 1);
  X << 1, 2, 3, 4;
  Vector y = 2.0 * X.col(0);
  CHECK_THROWS_WITH_AS(split_t_inference(X, y, 0.05),
                       doctest::Contains("zero"), std::runtime_error);
}

TEST_CASE("naive inference equals split inference on identical data") {
  Dataset data = synth_gaussian(50, 2, Vector::Ones(2), 0.7, 71);
  auto split = split_t_inference(data.X, data.y, 0.05);
  auto naive = naive_inference(data.X, data.y, 0.05);
  REQUIRE(split.size() == naive.size());
  for (std::size_t j = 0; j < split.size(); ++j) {
    CHECK(split[j].theta_hat == naive[j].theta_hat);
    CHECK(split[j].p_value == naive[j].p_value);
    CHECK(split[j].mode == InferenceMode::kSplitT);
    CHECK(naive[j].mode == InferenceMode::kNaive);
  }
}

TEST_CASE("truncated-normal mode reduces to classical z results when unconstrained") {
  // With an empty polyhedron the conditional law is the plain Gaussian, so
  // p-values and intervals must match the z formulas to 1e-6; the split-T
  // route converges to the same numbers as the degrees of freedom grow.
  TruncationInterval open{-kInf, kInf, true};
  double T = 0.42, tau = 0.19, alpha = 0.05;

  double p_tn = selective_p(T, tau, open, 0.0, Sided::kTwo);
  double p_z = 2.0 * norm_sf(std::fabs(T) / tau);
  CHECK(p_tn == doctest::Approx(p_z).epsilon(1e-6));

  auto [lo, hi] = selective_ci(T, tau, open, alpha);
  double z = norm_quantile(1.0 - alpha / 2.0);
  CHECK(lo == doctest::Approx(T - z * tau).epsilon(1e-6));
  CHECK(hi == doctest::Approx(T + z * tau).epsilon(1e-6));

  // t-based inference at n = 5000 sits within 1e-4 of the z answers.
  double p_t = 2.0 * student_t_sf(std::fabs(T) / tau, 5000 - 2);
  CHECK(std::fabs(p_t - p_z) < 1e-4);
  double q_t = student_t_quantile(1.0 - alpha / 2.0, 5000 - 2);
  CHECK(std::fabs(q_t - z) * tau < 1e-4);
}

TEST_CASE("selective p-values are roughly uniform under the null (mini)") {
  // 200-replicate smoke version of the acceptance calibration.
  Rng master(73);
  std::vector<double> pvals;
  for (int rep = 0; rep < 200; ++rep) {
    Dataset data = synth_gaussian(60, 4, Vector::Zero(4), 1.0,
                                  master.next_u64());
    Rng rng(master.next_u64());
    Vector y(60);
    for (int i = 0; i < 60; ++i) y(i) = rng.normal();
    SelectionOutcome sel = stepwise_first_k(data.X, y, 2);
    Vector v = sel.contrasts.row(0).transpose();
    double tau = std::sqrt(sel.sigma2_hat) * v.norm();
    TruncationInterval iv = truncation_bounds(sel.A, sel.b, v, y);
    pvals.push_back(selective_p(v.dot(y), tau, iv, 0.0, Sided::kTwo));
  }
  double ks = oracle::ks_uniform(pvals);
  // 1% critical value for n = 200 is about 1.63 / sqrt(200) = 0.115.
  CHECK(ks < 0.115);
}
