#ifndef RCISPRT_ESTIMATORS_HPP
#define RCISPRT_ESTIMATORS_HPP

#include <optional>
#include <span>
#include <string>

namespace rcisprt {

/// Gaussian-consistency factor of the median absolute deviation.
inline constexpr double kMadScale = 1.483;

double sample_mean(std::span<const double> v);

/// Middle order statistic, or the average of the two middle ones for even
/// length.
double median(std::span<const double> v);

/// 1.483 * median(|v - median(v)|).
double mad_scale(std::span<const double> v);

struct HuberConfig {
  double c = 1.345;
  double tol = 1e-6;
  int max_iter = 100;
};

struct HuberResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// Huber M-estimate of location by iterative reweighting, started at the
/// median with the MAD as fixed scale. A zero scale returns the median. On
/// hitting max_iter the last iterate is returned with converged = false.
HuberResult huber_m(std::span<const double> v, const HuberConfig& cfg = {});

struct MyriadConfig {
  enum class Linearity { Mad, Fixed };
  Linearity policy = Linearity::Mad;
  double m = 1.0;  // used when policy == Fixed
  int grid_points = 2048;
  /// Refinement tolerance relative to the sample range.
  double tol = 1e-9;
};

/// Sample myriad: global minimizer of prod_l [m^2 + (v_l - eta)^2] over
/// [min v, max v], found by a dense grid scan plus golden-section refinement
/// around the best grid point. Exact grid ties go to the point closest to
/// the median. With the MAD policy a zero MAD returns the median.
double myriad(std::span<const double> v, const MyriadConfig& cfg = {});

/// log prod_l [m^2 + (v_l - eta)^2].
double myriad_log_objective(std::span<const double> v, double m, double eta);

enum class EstimatorKind { Mean, Median, HuberM, Myriad };

const char* to_string(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator_kind(const std::string& name);

struct EstimatorOptions {
  HuberConfig huber;
  MyriadConfig myriad;
};

double estimate_location(EstimatorKind kind, std::span<const double> v,
                         const EstimatorOptions& options = {});

}  // namespace rcisprt

#endif  // RCISPRT_ESTIMATORS_HPP
