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

#include "phitest/selinf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ols_util.hpp"
#include "phitest/stats_math.hpp"

namespace phitest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogMassFloor = -690.77552789821368;  // log(1e-300)

// log(Phi(v) - Phi(u)) for u < v, without cancellation: the straddling case
// adds erf values of opposite sign, one-sided cases subtract upper tails in
// log space.
double log_gauss_mass(double u, double v) {
  if (!(u < v)) return -kInf;
  if (u == -kInf && v == kInf) return 0.0;
  if (u == -kInf) return log_norm_cdf(v);
  if (v == kInf) return log_norm_sf(u);
  if (u <= 0.0 && v >= 0.0) {
    double mass = 0.5 * (std::erf(v / std::sqrt(2.0)) -
                         std::erf(u / std::sqrt(2.0)));
    return std::log(mass);
  }
  if (u > 0.0) {
    return log_diff_exp(log_norm_sf(u), log_norm_sf(v));
  }
  return log_diff_exp(log_norm_cdf(v), log_norm_cdf(u));
}

struct TnTails {
  double log_cdf;   // log P(T <= t | T in [a, b])
  double log_sf;    // log P(T >= t | T in [a, b])
  double log_mass;  // log P(T in [a, b])
};

TnTails tn_log_tails(double t, double mu, double tau, double a, double b) {
  if (!(tau > 0.0)) throw std::invalid_argument("truncated normal: tau must be > 0");
  if (!(a < b)) throw std::runtime_error("truncated normal: interval numerically empty");
  t = std::clamp(t, a, b);
  double za = a == -kInf ? -kInf : (a - mu) / tau;
  double zb = b == kInf ? kInf : (b - mu) / tau;
  double zt = (t - mu) / tau;
  TnTails out;
  out.log_mass = log_gauss_mass(za, zb);
  out.log_cdf = log_gauss_mass(za, zt) - out.log_mass;
  out.log_sf = log_gauss_mass(zt, zb) - out.log_mass;
  return out;
}

double exp01(double logp) {
  if (logp == -kInf) return 0.0;
  return std::min(1.0, std::exp(logp));
}

}  // namespace

TruncationInterval truncation_bounds(const Matrix& A, const Vector& b,
                                     const Vector& v, const Vector& y) {
  TruncationInterval out;
  out.lower = -kInf;
  out.upper = kInf;
  if (A.rows() == 0) return out;

  if (((A * y - b).array() > 1e-9).any()) {
    throw std::invalid_argument("truncation_bounds: y outside selection polyhedron");
  }

  double v2 = v.squaredNorm();
  if (v2 <= 0.0) {
    throw std::invalid_argument("truncation_bounds: zero contrast vector");
  }
  Vector c = v / v2;
  double t_obs = v.dot(y);
  Vector w = y - c * t_obs;

  Vector rate = A * c;          // per-row coefficient of the contrast value
  Vector slack = b - A * w;     // per-row bound once w is fixed
  for (int l = 0; l < A.rows(); ++l) {
    double d = rate(l);
    if (std::fabs(d) < 1e-12) {
      if (slack(l) < -1e-9) out.feasible = false;
      continue;
    }
    double ratio = slack(l) / d;
    if (d > 0.0) {
      out.upper = std::min(out.upper, ratio);
    } else {
      out.lower = std::max(out.lower, ratio);
    }
  }
  if (out.lower > out.upper) out.feasible = false;
  return out;
}

double tn_cdf(double t, double mu, double tau, double a, double b) {
  TnTails tails = tn_log_tails(t, mu, tau, a, b);
  if (tails.log_mass < kLogMassFloor) {
    throw std::runtime_error("truncated normal: interval numerically empty");
  }
  return exp01(tails.log_cdf);
}

double tn_sf(double t, double mu, double tau, double a, double b) {
  TnTails tails = tn_log_tails(t, mu, tau, a, b);
  if (tails.log_mass < kLogMassFloor) {
    throw std::runtime_error("truncated normal: interval numerically empty");
  }
  return exp01(tails.log_sf);
}

double tn_log_cdf(double t, double mu, double tau, double a, double b) {
  return tn_log_tails(t, mu, tau, a, b).log_cdf;
}

double tn_log_sf(double t, double mu, double tau, double a, double b) {
  return tn_log_tails(t, mu, tau, a, b).log_sf;
}

double selective_p(double T, double tau, const TruncationInterval& interval,
                   double theta0, Sided sided) {
  if (!interval.feasible) {
    throw std::invalid_argument("selective_p: infeasible truncation interval");
  }
  switch (sided) {
    case Sided::kGreater:
      return tn_sf(T, theta0, tau, interval.lower, interval.upper);
    case Sided::kLess:
      return tn_cdf(T, theta0, tau, interval.lower, interval.upper);
    case Sided::kTwo: {
      double lo = tn_cdf(T, theta0, tau, interval.lower, interval.upper);
      double hi = tn_sf(T, theta0, tau, interval.lower, interval.upper);
      return std::min(1.0, 2.0 * std::min(lo, hi));
    }
  }
  return 1.0;
}

namespace {

// Non-throwing conditional tails used while scanning the mean parameter: far
// outside the interval the conditional law degenerates to the nearer
// endpoint, which fixes the limiting tail values.
double cdf_at_mean(double T, double tau, double a, double b, double theta) {
  TnTails tails = tn_log_tails(T, theta, tau, a, b);
  if (std::isnan(tails.log_cdf) || tails.log_mass == -kInf) {
    return theta < 0.5 * (a + b) ? 1.0 : 0.0;
  }
  return exp01(tails.log_cdf);
}

double sf_at_mean(double T, double tau, double a, double b, double theta) {
  TnTails tails = tn_log_tails(T, theta, tau, a, b);
  if (std::isnan(tails.log_sf) || tails.log_mass == -kInf) {
    return theta < 0.5 * (a + b) ? 0.0 : 1.0;
  }
  return exp01(tails.log_sf);
}

}  // namespace

std::pair<double, double> selective_ci(double T, double tau,
                                       const TruncationInterval& interval,
                                       double alpha) {
  if (!interval.feasible) {
    throw std::invalid_argument("selective_ci: infeasible truncation interval");
  }
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("selective_ci: alpha must lie in (0, 0.5]");
  }
  const double a = interval.lower;
  const double b = interval.upper;
  const double half = 0.5 * alpha;
  const double span = 50.0 * tau;
  const double tol = 1e-8 * tau;

  // Solves g(theta) = target for a non-increasing g by bracket doubling from
  // [center - tau, center + tau] followed by bisection. A bracket escaping
  // center + 50 tau marks the endpoint unbounded on that side.
  auto solve_decreasing = [&](auto&& g, double target, double center,
                              double unbounded_value) {
    double lo = center - tau, hi = center + tau, width = tau;
    while (g(hi) > target) {
      width *= 2.0;
      hi = center + width;
      if (width > span) return unbounded_value;
    }
    width = tau;
    while (g(lo) < target) {
      width *= 2.0;
      lo = center - width;
      if (width > span) break;
    }
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
      double mid = 0.5 * (lo + hi);
      if (g(mid) > target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  // Upper endpoint: conditional P(T' <= T) = alpha/2; cdf_at_mean decreases
  // in theta. Lower endpoint: conditional P(T' >= T) = alpha/2; sf_at_mean
  // increases in theta, so solve on the negated axis.
  double hi_theta = solve_decreasing(
      [&](double theta) { return cdf_at_mean(T, tau, a, b, theta); }, half, T,
      kInf);
  double lo_theta = -solve_decreasing(
      [&](double neg_theta) { return sf_at_mean(T, tau, a, b, -neg_theta); },
      half, -T, kInf);
  return {lo_theta, hi_theta};
}

namespace {

std::vector<SelectiveSummary> t_inference(const Matrix& X_S, const Vector& y,
                                          double alpha, InferenceMode mode) {
  const int n = static_cast<int>(X_S.rows());
  const int k = static_cast<int>(X_S.cols());
  if (n < k + 2) {
    throw std::invalid_argument("t inference requires at least |S| + 2 rows");
  }
  detail::OlsSolution sol = detail::ols_solve(X_S, y, /*want_contrasts=*/false);
  double var_y = (y.array() - y.mean()).square().mean();
  if (sol.sigma2 <= 1e-20 * std::max(var_y, 1e-300)) {
    throw std::runtime_error(
        "t inference: residual variance is zero (exact fit); p-values are "
        "undefined");
  }
  double q = student_t_quantile(1.0 - 0.5 * alpha, sol.dof);
  std::vector<SelectiveSummary> out;
  for (int j = 0; j < k; ++j) {
    SelectiveSummary s;
    s.theta_hat = sol.beta(j);
    s.observed = sol.beta(j);
    s.scale = sol.se(j);
    s.stat = sol.se(j) > 0.0 ? sol.beta(j) / sol.se(j) : 0.0;
    s.p_value = 2.0 * student_t_sf(std::fabs(s.stat), sol.dof);
    s.ci_low = sol.beta(j) - q * sol.se(j);
    s.ci_high = sol.beta(j) + q * sol.se(j);
    s.alpha = alpha;
    s.mode = mode;
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::vector<SelectiveSummary> split_t_inference(const Matrix& X_S,
                                                const Vector& y, double alpha) {
  return t_inference(X_S, y, alpha, InferenceMode::kSplitT);
}

std::vector<SelectiveSummary> naive_inference(const Matrix& X_S,
                                              const Vector& y, double alpha) {
  return t_inference(X_S, y, alpha, InferenceMode::kNaive);
}

}  // namespace phitest
