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

#ifndef PHITEST_STATS_MATH_HPP
#define PHITEST_STATS_MATH_HPP

namespace phitest {

// Standard normal CDF and tail probabilities. The log variants stay finite
// far into the tails (|z| up to thousands), where the plain values underflow.
double norm_cdf(double z);
double norm_sf(double z);
double log_norm_cdf(double z);
double log_norm_sf(double z);
double norm_quantile(double p);

// log(exp(la) - exp(lb)) for la >= lb; -inf inputs are handled.
double log_diff_exp(double la, double lb);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Student-t distribution with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);
double student_t_sf(double t, double dof);
double student_t_quantile(double p, double dof);

}  // namespace phitest

#endif  // PHITEST_STATS_MATH_HPP
