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

#ifndef PHITEST_SELINF_HPP
#define PHITEST_SELINF_HPP

#include <utility>
#include <vector>

#include "phitest/dataset.hpp"

namespace phitest {

// Interval to which the contrast value is confined once the orthogonal
// component of the response and the selection event are fixed. Endpoints may
// be infinite; `feasible` is false only on numerical inconsistency.
struct TruncationInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = true;
};

// Computes the interval for contrast v under the polyhedron {y : A y <= b}.
// Requires A y <= b for the observed y.
TruncationInterval truncation_bounds(const Matrix& A, const Vector& b,
                                     const Vector& v, const Vector& y);

// CDF of N(mu, tau^2) truncated to [a, b], evaluated at t (clamped into the
// interval). Log-space tail arithmetic keeps the relative error below 1e-10
// even for intervals far in a tail. Throws when the interval mass is below
// 1e-300.
double tn_cdf(double t, double mu, double tau, double a, double b);
double tn_sf(double t, double mu, double tau, double a, double b);

// Log-space conditional tails. These stay finite whenever the interval mass
// has a representable logarithm, which covers means arbitrarily far from the
// interval; only a truly degenerate interval yields -inf/NaN.
double tn_log_cdf(double t, double mu, double tau, double a, double b);
double tn_log_sf(double t, double mu, double tau, double a, double b);

enum class Sided { kTwo, kGreater, kLess };

// Tail probability of the observed contrast under mean theta0.
double selective_p(double T, double tau, const TruncationInterval& interval,
                   double theta0, Sided sided);

// Equal-tailed interval by test inversion: each endpoint solves a
// truncated-normal tail equation in the mean parameter; bisection with
// geometric bracket expansion up to T +- 50 tau (beyond which the endpoint is
// reported infinite).
std::pair<double, double> selective_ci(double T, double tau,
                                       const TruncationInterval& interval,
                                       double alpha);

enum class InferenceMode { kTruncatedNormal, kSplitT, kNaive };

// Per-coefficient inference summary, one row of the final table.
struct SelectiveSummary {
  double observed = 0.0;   // contrast value (equals the coefficient estimate)
  double theta_hat = 0.0;  // coefficient estimate
  double scale = 0.0;      // standard error of the estimate
  double stat = 0.0;       // theta_hat / scale
  double p_value = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
  InferenceMode mode = InferenceMode::kSplitT;
};

// Classical t inference on an OLS refit; valid post selection when the rows
// are disjoint from the rows used to select.
std::vector<SelectiveSummary> split_t_inference(const Matrix& X_S,
                                                const Vector& y, double alpha);

// Identical mechanics run on the same data used for selection; reported to
// show the effect of ignoring the selection step.
std::vector<SelectiveSummary> naive_inference(const Matrix& X_S,
                                              const Vector& y, double alpha);

}  // namespace phitest

#endif  // PHITEST_SELINF_HPP
