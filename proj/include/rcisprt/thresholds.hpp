#ifndef RCISPRT_THRESHOLDS_HPP
#define RCISPRT_THRESHOLDS_HPP

#include <optional>
#include <string>

#include "rcisprt/hypothesis.hpp"

namespace rcisprt {

/// Required false-alarm (alpha) and misdetection (beta) probabilities.
struct ErrorBudget {
  double alpha;
  double beta;

  ErrorBudget(double alpha, double beta);
};

/// Decision thresholds; lower < 0 < upper.
struct Thresholds {
  double lower = 0.0;  // lambda: decide H0 at or below
  double upper = 0.0;  // upsilon: decide H1 at or above
};

/// Series bound on the false-alarm probability for threshold `upper`:
///   1/2 * sum_{t>=1} exp[(-u^2 - mu0^2 t^2 + 2 u mu0 t) / (2 var0 xi t)].
/// Summed past the peak until a term drops below `floor`; the remainder is
/// then replaced by a geometric upper bound, so the result never
/// underestimates the full series. Throws NumericalError when t_max is
/// reached first.
double false_alarm_series(double mean0, double var0, double xi, double upper, double floor,
                          long t_max);

/// Same series for the misdetection probability at threshold `lower`.
double misdetection_series(double mean1, double var1, double xi, double lower, double floor,
                           long t_max);

/// Closed-form thresholds at the boundary of the geometric-series bounds.
/// Works for nominal and clipped LLR moments alike. Throws NumericalError if
/// the moments are not separated (mean0 >= 0 or mean1 <= 0).
Thresholds closed_form_thresholds(const LlrMoments& moments, double xi,
                                  const ErrorBudget& budget);

struct NumericThresholdOptions {
  /// Relative term floor `tol * alpha` used to truncate the series.
  double tol = 1e-12;
  long t_max = 100000;
  /// When the bound already holds at zero for one side, use that side's
  /// closed-form value instead of failing.
  bool closed_form_fallback = false;
};

/// Tighter thresholds from solving the series bound for equality by
/// bisection on [0, 2 * closed form]. Throws NumericalError when the root is
/// not bracketed (e.g. the bound already holds at zero, unless
/// `closed_form_fallback` is set) or the series cannot be truncated within
/// t_max.
Thresholds numeric_thresholds(const LlrMoments& moments, double xi, const ErrorBudget& budget,
                              const NumericThresholdOptions& options = {});

enum class ThresholdMethod { ClosedForm, Numeric };

const char* to_string(ThresholdMethod method);
std::optional<ThresholdMethod> parse_threshold_method(const std::string& name);

Thresholds compute_thresholds(ThresholdMethod method, const LlrMoments& moments, double xi,
                              const ErrorBudget& budget,
                              const NumericThresholdOptions& options = {});

}  // namespace rcisprt

#endif  // RCISPRT_THRESHOLDS_HPP
