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

#include "phitest/stats_math.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phitest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kSqrt2 = 1.4142135623730950488;

// Mills-ratio continued fraction for the far upper tail (z >= 35, where the
// plain erfc underflows): Q(z) = phi(z) * R(z) with
// R(z) = 1/(z + 1/(z + 2/(z + 3/(...)))).
double mills_ratio(double z) {
  double cf = 0.0;
  for (int k = 300; k >= 1; --k) {
    cf = static_cast<double>(k) / (z + cf);
  }
  return 1.0 / (z + cf);
}

}  // namespace

double norm_sf(double z) {
  if (z == kInf) return 0.0;
  if (z == -kInf) return 1.0;
  return 0.5 * std::erfc(z / kSqrt2);
}

double norm_cdf(double z) { return norm_sf(-z); }

double log_norm_sf(double z) {
  if (z == kInf) return -kInf;
  if (z == -kInf) return 0.0;
  if (z < 35.0) {
    double q = norm_sf(z);
    if (q > 0.0) return std::log(q);
  }
  // Far right tail: log Q(z) = -z^2/2 - log(sqrt(2 pi)) + log R(z).
  return -0.5 * z * z - kLogSqrt2Pi + std::log(mills_ratio(z));
}

double log_norm_cdf(double z) { return log_norm_sf(-z); }

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw std::invalid_argument("norm_quantile: p must lie in [0, 1]");
  }
  // Bisection on the CDF; the CDF itself is accurate over the whole range.
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (norm_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double log_diff_exp(double la, double lb) {
  if (lb == -kInf) return la;
  if (la < lb) throw std::invalid_argument("log_diff_exp: la < lb");
  if (la == lb) return -kInf;
  return la + std::log1p(-std::exp(lb - la));
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * beta_cf(a, b, x) / a;
  }
  return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double dof) {
  if (dof <= 0.0) throw std::invalid_argument("student_t_sf: dof must be > 0");
  if (t == kInf) return 0.0;
  if (t == -kInf) return 1.0;
  double x = dof / (dof + t * t);
  double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

double student_t_cdf(double t, double dof) { return 1.0 - student_t_sf(t, dof); }

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("student_t_quantile: p must lie in (0, 1)");
  }
  double lo = -1e8, hi = 1e8;
  for (int i = 0; i < 300; ++i) {
    double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace phitest
