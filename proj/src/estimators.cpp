#include "rcisprt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rcisprt {

namespace {

void require_nonempty(std::span<const double> v, const char* who) {
  if (v.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
}

// Median of a scratch buffer, reordering it in place.
double median_inplace(std::span<double> buf) {
  const std::size_t n = buf.size();
  const std::size_t mid = n / 2;
  std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
  const double upper = buf[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(buf.begin(), buf.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace

double sample_mean(std::span<const double> v) {
  require_nonempty(v, "sample_mean");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::span<const double> v) {
  require_nonempty(v, "median");
  std::vector<double> buf(v.begin(), v.end());
  return median_inplace(buf);
}

double mad_scale(std::span<const double> v) {
  require_nonempty(v, "mad_scale");
  std::vector<double> buf(v.begin(), v.end());
  const double med = median_inplace(buf);
  for (std::size_t i = 0; i < v.size(); ++i) buf[i] = std::abs(v[i] - med);
  return kMadScale * median_inplace(buf);
}

HuberResult huber_m(std::span<const double> v, const HuberConfig& cfg) {
  require_nonempty(v, "huber_m");
  HuberResult out;
  out.value = median(v);
  const double scale = mad_scale(v);
  if (scale == 0.0) return out;

  double est = out.value;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    double num = 0.0;
    double den = 0.0;
    for (double x : v) {
      const double r = std::abs(x - est) / scale;
      const double w = r <= cfg.c ? 1.0 : cfg.c / r;
      num += w * x;
      den += w;
    }
    const double next = num / den;
    const double step = std::abs(next - est) / scale;
    est = next;
    out.iterations = it;
    if (step < cfg.tol) {
      out.value = est;
      out.converged = true;
      return out;
    }
  }
  out.value = est;
  out.converged = false;
  return out;
}

double myriad_log_objective(std::span<const double> v, double m, double eta) {
  const double m2 = m * m;
  double acc = 0.0;
  for (double x : v) {
    const double d = x - eta;
    acc += std::log(m2 + d * d);
  }
  return acc;
}

namespace {

// Same objective as myriad_log_objective, evaluated as a running product with
// periodic exponent extraction. Only valid when no chunk of four factors can
// leave the double range.
double fast_log_objective(std::span<const double> v, double m2, double eta) {
  double prod = 1.0;
  int exponent = 0;
  std::size_t i = 0;
  for (double x : v) {
    const double d = x - eta;
    prod *= m2 + d * d;
    if ((++i & 3U) == 0) {
      int e = 0;
      prod = std::frexp(prod, &e);
      exponent += e;
    }
  }
  return std::log(prod) + exponent * std::numbers::ln2;
}

}  // namespace

double myriad(std::span<const double> v, const MyriadConfig& cfg) {
  require_nonempty(v, "myriad");
  const auto [min_it, max_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *min_it;
  const double hi = *max_it;
  if (lo == hi) return lo;

  double m = cfg.m;
  if (cfg.policy == MyriadConfig::Linearity::Mad) {
    m = mad_scale(v);
    if (m == 0.0) return median(v);
  } else if (!(m > 0.0)) {
    throw std::invalid_argument("myriad: fixed linearity parameter must be > 0");
  }
  const int points = std::max(cfg.grid_points, 3);
  const double med = median(v);
  const double m2 = m * m;
  const double range = hi - lo;
  const double worst = m2 + range * range;
  const bool fast = m2 > 1e-70 && worst < 1e70;

  const double step = range / (points - 1);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int j = 0; j < points; ++j) {
    const double eta = (j + 1 == points) ? hi : lo + j * step;
    const double val = fast ? fast_log_objective(v, m2, eta) : myriad_log_objective(v, m, eta);
    if (val < best_val) {
      best_val = val;
      best = j;
    } else if (val == best_val) {
      const double cur = lo + best * step;
      if (std::abs(eta - med) < std::abs(cur - med)) best = j;
    }
  }

  // Golden-section refinement on the two cells around the best grid point.
  double a = std::max(lo, lo + (best - 1) * step);
  double b = std::min(hi, lo + (best + 1) * step);
  const double x_tol = cfg.tol * range;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = myriad_log_objective(v, m, x1);
  double f2 = myriad_log_objective(v, m, x2);
  for (int it = 0; it < 200 && b - a > x_tol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = myriad_log_objective(v, m, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = myriad_log_objective(v, m, x2);
    }
  }
  const double refined = 0.5 * (a + b);
  const double grid_eta = lo + best * step;
  // Keep the grid point if refinement did not improve on it.
  if (myriad_log_objective(v, m, refined) <= myriad_log_objective(v, m, grid_eta)) {
    return std::clamp(refined, lo, hi);
  }
  return grid_eta;
}

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Mean:
      return "mean";
    case EstimatorKind::Median:
      return "median";
    case EstimatorKind::HuberM:
      return "huber";
    case EstimatorKind::Myriad:
      return "myriad";
  }
  return "mean";
}

std::optional<EstimatorKind> parse_estimator_kind(const std::string& name) {
  if (name == "mean") return EstimatorKind::Mean;
  if (name == "median") return EstimatorKind::Median;
  if (name == "huber") return EstimatorKind::HuberM;
  if (name == "myriad") return EstimatorKind::Myriad;
  return std::nullopt;
}

double estimate_location(EstimatorKind kind, std::span<const double> v,
                         const EstimatorOptions& options) {
  switch (kind) {
    case EstimatorKind::Mean:
      return sample_mean(v);
    case EstimatorKind::Median:
      return median(v);
    case EstimatorKind::HuberM:
      return huber_m(v, options.huber).value;
    case EstimatorKind::Myriad:
      return myriad(v, options.myriad);
  }
  throw std::invalid_argument("estimate_location: unknown estimator");
}

}  // namespace rcisprt
