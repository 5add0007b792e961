#ifndef RCISPRT_LFD_HPP
#define RCISPRT_LFD_HPP

#include <array>
#include <optional>
#include <string>

#include "rcisprt/hypothesis.hpp"

namespace rcisprt {

/// Least-favorable pair for epsilon-contamination of a Gaussian test, as the
/// multipliers of the fixed point
///
///   q0 = max{c0 * q1, (1 - eps) p0},   q1 = max{c1 * q0, (1 - eps) p1}.
///
/// Wherever a multiplier is active the density ratio q1/q0 is pinned, so the
/// robust LLR is the nominal LLR clamped to [log c1, -log c0].
struct ClippedLrtParams {
  double c0 = 0.0;
  double c1 = 0.0;
  /// Lower LLR clipping bound C0 = log c1.
  double lower = -INFINITY;
  /// Upper LLR clipping bound C1 = -log c0.
  double upper = INFINITY;
  double epsilon = 0.0;
  int iterations = 0;

  /// The epsilon = 0 sentinel: no clipping, q_i equal to the nominals.
  bool unclipped() const { return epsilon == 0.0; }
};

struct LfdSolverOptions {
  /// Normalization tolerance on each of the two integrals.
  double tol = 1e-10;
  int max_iter = 50;
};

/// Solves the fixed point above by alternating bisection on each
/// normalization residual. Integrals use adaptive Simpson over
/// [min mu - 10 sigma, max mu + 10 sigma].
///
/// Requires 0 <= epsilon < 0.5. Throws NumericalError on non-convergence or
/// when the clipping band collapses (c0 * c1 >= 1).
ClippedLrtParams solve_lfd_eps(const GaussianBinaryTest& test, double epsilon,
                               const LfdSolverOptions& options = {});

/// Integration support used by the solver.
std::array<double, 2> lfd_support(const GaussianBinaryTest& test);

/// log q_h(y) for the solved least-favorable pair.
double lfd_log_density(const ClippedLrtParams& params, const GaussianBinaryTest& test,
                       Hypothesis h, double y);

/// clamp(llr(test, y), C0, C1).
double clipped_llr(const ClippedLrtParams& params, const GaussianBinaryTest& test, double y);

inline double clip_llr(const ClippedLrtParams& params, double eta) {
  return eta < params.lower ? params.lower : (eta > params.upper ? params.upper : eta);
}

/// How P_i(eta <= C0) and P_i(eta >= C1) are evaluated inside the
/// excess-mass formulas.
enum class MassApproximation {
  /// Gaussian tail with the LLR variance as the divisor of the Q-function
  /// argument, exactly as the printed approximation reads.
  AsPrinted,
  /// Gaussian tail standardized by the LLR standard deviation.
  StdDev,
  /// Exact tail of the quadratic-in-Gaussian nominal LLR.
  Exact,
};

const char* to_string(MassApproximation mode);
std::optional<MassApproximation> parse_mass_approximation(const std::string& name);

/// Probability masses of the clipped LLR at the two clipping points plus the
/// interior (uniform) density level, for each hypothesis.
struct ExcessMass {
  std::array<double, 2> at_lower{};        // A0[i]
  std::array<double, 2> at_upper{};        // A1[i]
  std::array<double, 2> interior_density{};  // A2[i]
  LlrMoments nominal;                      // mu, sigma^2 of the nominal LLR
  bool unbounded = false;

  double interior_mass(Hypothesis h) const {
    return 1.0 - at_lower[index_of(h)] - at_upper[index_of(h)];
  }
};

ExcessMass excess_masses(const ClippedLrtParams& params, const GaussianBinaryTest& test,
                         double epsilon, MassApproximation mode = MassApproximation::AsPrinted);

/// Moments of the clipped LLR under the two-delta-plus-uniform density.
struct ClippedLlrMoments : LlrMoments {};

/// For an unbounded band the nominal moments are returned unchanged.
ClippedLlrMoments clipped_llr_moments(const ExcessMass& masses, const ClippedLrtParams& params);

}  // namespace rcisprt

#endif  // RCISPRT_LFD_HPP
