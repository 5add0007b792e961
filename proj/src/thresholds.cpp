#include "rcisprt/thresholds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rcisprt/errors.hpp"

namespace rcisprt {

ErrorBudget::ErrorBudget(double a, double b) : alpha(a), beta(b) {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0)) {
    throw std::invalid_argument("ErrorBudget: alpha and beta must lie in (0, 1)");
  }
}

namespace {

void check_separated(const LlrMoments& m) {
  if (!(m.mean0 < 0.0) || !(m.mean1 > 0.0)) {
    throw NumericalError("thresholds: LLR moments are not separated (need mean0 < 0 < mean1)");
  }
  if (!(m.var0 > 0.0) || !(m.var1 > 0.0)) {
    throw NumericalError("thresholds: LLR variances must be positive");
  }
}

// 1/2 sum_{t>=1} exp(-(u + d t)^2 / (2 s t)) with u >= 0, d > 0, s > 0.
double one_sided_series(double u, double d, double s, double floor, long t_max) {
  const double peak = u / d;
  double sum = 0.0;
  for (long t = 1; t <= t_max; ++t) {
    const double tt = static_cast<double>(t);
    const double x = u + d * tt;
    const double term = std::exp(-x * x / (2.0 * s * tt));
    sum += term;
    if (tt > peak && term < floor) {
      // Past the peak successive term ratios only shrink, so the remainder is
      // at most a geometric tail with the next ratio.
      const double r = std::exp(-(d * d - u * u / (tt * (tt + 1.0))) / (2.0 * s));
      return 0.5 * (sum + term * r / (1.0 - r));
    }
  }
  throw NumericalError("threshold series: truncation budget t_max exceeded");
}

// Closed form of one threshold: (4 s / mu) [log(p/2) + log(1 - exp(-mu^2 / (2 s)))]
// with s = var * xi.
double closed_form_side(double mean, double var, double xi, double p) {
  const double s = var * xi;
  return 4.0 * s / mean * (std::log(p / 2.0) + std::log(-std::expm1(-mean * mean / (2.0 * s))));
}

// Smallest u >= 0 with series(u) = p, in [0, 2 * closed].
double solve_side(double d, double s, double p, double closed, const NumericThresholdOptions& o) {
  const double floor = o.tol * p;
  auto residual = [&](double u) { return one_sided_series(u, d, s, floor, o.t_max) - p; };
  double lo = 0.0;
  double hi = 2.0 * closed;
  if (residual(lo) <= 0.0) {
    if (o.closed_form_fallback) return closed;
    throw NumericalError("numeric_thresholds: bound already met at zero; root not bracketed");
  }
  if (residual(hi) > 0.0) throw NumericalError("numeric_thresholds: root not bracketed above");
  for (int i = 0; i < 200 && hi - lo > 1e-14 * closed; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // hi satisfies the bound.
  return hi;
}

}  // namespace

double false_alarm_series(double mean0, double var0, double xi, double upper, double floor,
                          long t_max) {
  if (!(mean0 < 0.0) || !(upper >= 0.0)) {
    throw std::invalid_argument("false_alarm_series: need mean0 < 0 and upper >= 0");
  }
  return one_sided_series(upper, -mean0, var0 * xi, floor, t_max);
}

double misdetection_series(double mean1, double var1, double xi, double lower, double floor,
                           long t_max) {
  if (!(mean1 > 0.0) || !(lower <= 0.0)) {
    throw std::invalid_argument("misdetection_series: need mean1 > 0 and lower <= 0");
  }
  return one_sided_series(-lower, mean1, var1 * xi, floor, t_max);
}

Thresholds closed_form_thresholds(const LlrMoments& m, double xi, const ErrorBudget& budget) {
  if (!(xi > 0.0)) throw std::invalid_argument("thresholds: xi must be > 0");
  check_separated(m);
  Thresholds th;
  th.upper = closed_form_side(m.mean0, m.var0, xi, budget.alpha);
  th.lower = closed_form_side(m.mean1, m.var1, xi, budget.beta);
  return th;
}

Thresholds numeric_thresholds(const LlrMoments& m, double xi, const ErrorBudget& budget,
                              const NumericThresholdOptions& options) {
  if (!(options.tol > 0.0) || options.t_max < 1) {
    throw std::invalid_argument("numeric_thresholds: need tol > 0 and t_max >= 1");
  }
  const Thresholds closed = closed_form_thresholds(m, xi, budget);
  Thresholds th;
  th.upper = solve_side(-m.mean0, m.var0 * xi, budget.alpha, closed.upper, options);
  th.lower = -solve_side(m.mean1, m.var1 * xi, budget.beta, -closed.lower, options);
  return th;
}

const char* to_string(ThresholdMethod method) {
  return method == ThresholdMethod::ClosedForm ? "closed_form" : "numeric";
}

std::optional<ThresholdMethod> parse_threshold_method(const std::string& name) {
  if (name == "closed_form") return ThresholdMethod::ClosedForm;
  if (name == "numeric") return ThresholdMethod::Numeric;
  return std::nullopt;
}

Thresholds compute_thresholds(ThresholdMethod method, const LlrMoments& moments, double xi,
                              const ErrorBudget& budget, const NumericThresholdOptions& options) {
  if (method == ThresholdMethod::ClosedForm) return closed_form_thresholds(moments, xi, budget);
  return numeric_thresholds(moments, xi, budget, options);
}

}  // namespace rcisprt
