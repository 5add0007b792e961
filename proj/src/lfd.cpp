#include "rcisprt/lfd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rcisprt/errors.hpp"
#include "rcisprt/numerics.hpp"

namespace rcisprt {

namespace {

struct Multipliers {
  double c0;
  double c1;
};

// Nominal densities scaled by (1 - eps), i.e. the lower band p_i'.
struct LowerBand {
  const GaussianBinaryTest& test;
  double log_scale;

  double p0(double y) const {
    return std::exp(log_scale + normal_log_pdf(y, test.mu0(), test.var0()));
  }
  double p1(double y) const {
    return std::exp(log_scale + normal_log_pdf(y, test.mu1(), test.var1()));
  }
};

// q1 after `history.size()` sweeps of the fixed-point iteration, starting
// from q1 = p1'.
double iterate_q1(const LowerBand& band, const std::vector<Multipliers>& history, double y) {
  const double p0 = band.p0(y);
  const double p1 = band.p1(y);
  double q1 = p1;
  for (const auto& m : history) {
    const double q0 = std::max(m.c0 * q1, p0);
    q1 = std::max(m.c1 * q0, p1);
  }
  return q1;
}

// Smallest c with integral(max{c * g, f}) = 1, by bracketing and bisection on
// the residual (increasing in c).
template <typename Integral>
double normalize_multiplier(Integral integral, double tol) {
  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (integral(hi) - 1.0 < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("solve_lfd_eps: cannot bracket multiplier");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = integral(mid) - 1.0;
    if (std::abs(r) < 0.1 * tol) return mid;
    if (r > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-16 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::array<double, 2> lfd_support(const GaussianBinaryTest& test) {
  const double sigma = std::sqrt(std::max(test.var0(), test.var1()));
  return {std::min(test.mu0(), test.mu1()) - 10.0 * sigma,
          std::max(test.mu0(), test.mu1()) + 10.0 * sigma};
}

ClippedLrtParams solve_lfd_eps(const GaussianBinaryTest& test, double epsilon,
                               const LfdSolverOptions& options) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("solve_lfd_eps: epsilon must lie in [0, 0.5)");
  }
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_lfd_eps: tol must be > 0");
  if (epsilon == 0.0) return ClippedLrtParams{};

  const LowerBand band{test, std::log1p(-epsilon)};
  const auto [lo, hi] = lfd_support(test);
  const double quad_tol = 0.01 * options.tol;
  std::vector<Multipliers> history;

  Multipliers current{0.0, 0.0};
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    // c0 normalizes q0 = max{c0 * q1_k, p0'}.
    const auto q0_mass = [&](double c0) {
      return adaptive_simpson(
          [&](double y) { return std::max(c0 * iterate_q1(band, history, y), band.p0(y)); }, lo,
          hi, quad_tol);
    };
    const double c0 = normalize_multiplier(q0_mass, options.tol);

    // c1 normalizes q1 = max{c1 * q0_{k+1}, p1'}.
    const auto q1_mass = [&](double c1) {
      return adaptive_simpson(
          [&](double y) {
            const double q0 = std::max(c0 * iterate_q1(band, history, y), band.p0(y));
            return std::max(c1 * q0, band.p1(y));
          },
          lo, hi, quad_tol);
    };
    const double c1 = normalize_multiplier(q1_mass, options.tol);

    const Multipliers next{c0, c1};
    const bool converged = iter > 1 && std::abs(next.c0 - current.c0) <= options.tol * next.c0 &&
                           std::abs(next.c1 - current.c1) <= options.tol * next.c1;
    history.push_back(next);
    current = next;
    if (converged) {
      if (current.c0 * current.c1 >= 1.0) {
        throw NumericalError("solve_lfd_eps: clipping band collapsed (c0*c1 >= 1); epsilon too large");
      }
      ClippedLrtParams out;
      out.c0 = current.c0;
      out.c1 = current.c1;
      out.lower = std::log(current.c1);
      out.upper = -std::log(current.c0);
      out.epsilon = epsilon;
      out.iterations = iter;
      return out;
    }
  }
  throw NumericalError("solve_lfd_eps: fixed-point iteration did not converge");
}

double lfd_log_density(const ClippedLrtParams& params, const GaussianBinaryTest& test,
                       Hypothesis h, double y) {
  const double log_scale = std::log1p(-params.epsilon);
  const double lp0 = log_scale + normal_log_pdf(y, test.mu0(), test.var0());
  const double lp1 = log_scale + normal_log_pdf(y, test.mu1(), test.var1());
  if (params.unclipped()) return h == Hypothesis::H0 ? lp0 : lp1;
  // Pointwise fixed point for c0 * c1 < 1.
  if (h == Hypothesis::H0) return std::max(std::log(params.c0) + lp1, lp0);
  return std::max(std::log(params.c1) + lp0, lp1);
}

double clipped_llr(const ClippedLrtParams& params, const GaussianBinaryTest& test, double y) {
  return clip_llr(params, llr(test, y));
}

const char* to_string(MassApproximation mode) {
  switch (mode) {
    case MassApproximation::AsPrinted:
      return "as_printed";
    case MassApproximation::StdDev:
      return "stddev";
    case MassApproximation::Exact:
      return "exact";
  }
  return "as_printed";
}

std::optional<MassApproximation> parse_mass_approximation(const std::string& name) {
  if (name == "as_printed") return MassApproximation::AsPrinted;
  if (name == "stddev") return MassApproximation::StdDev;
  if (name == "exact") return MassApproximation::Exact;
  return std::nullopt;
}

ExcessMass excess_masses(const ClippedLrtParams& params, const GaussianBinaryTest& test,
                         double epsilon, MassApproximation mode) {
  const double c_lo = params.lower;
  const double c_hi = params.upper;
  if (c_hi == c_lo) throw std::invalid_argument("excess_masses: degenerate clipping band");

  ExcessMass out;
  out.nominal = llr_moments(test);
  out.unbounded = std::isinf(c_lo) && std::isinf(c_hi);

  for (int i = 0; i < 2; ++i) {
    const auto h = static_cast<Hypothesis>(i);
    const double mu = out.nominal.mean(h);
    const double var = out.nominal.var(h);
    double below = 0.0;
    double above = 0.0;
    switch (mode) {
      case MassApproximation::AsPrinted:
        below = q_function(-(c_lo - mu) / var);
        above = q_function((c_hi - mu) / var);
        break;
      case MassApproximation::StdDev:
        below = q_function(-(c_lo - mu) / std::sqrt(var));
        above = q_function((c_hi - mu) / std::sqrt(var));
        break;
      case MassApproximation::Exact:
        below = llr_cdf(test, h, c_lo);
        above = 1.0 - llr_cdf(test, h, c_hi);
        break;
    }
    out.at_lower[i] = (1.0 - epsilon) * below + i * epsilon;
    out.at_upper[i] = (1.0 - epsilon) * above + (1 - i) * epsilon;
    out.interior_density[i] =
        out.unbounded ? 0.0 : (1.0 - out.at_lower[i] - out.at_upper[i]) / (c_hi - c_lo);
  }
  return out;
}

ClippedLlrMoments clipped_llr_moments(const ExcessMass& masses, const ClippedLrtParams& params) {
  ClippedLlrMoments out;
  if (masses.unbounded || params.unclipped()) {
    static_cast<LlrMoments&>(out) = masses.nominal;
    return out;
  }
  const double lo = params.lower;
  const double hi = params.upper;
  if (!(lo < hi)) throw std::invalid_argument("clipped_llr_moments: need C0 < C1");
  double mean[2];
  double var[2];
  for (int i = 0; i < 2; ++i) {
    const double a0 = masses.at_lower[i];
    const double a1 = masses.at_upper[i];
    const double a2 = masses.interior_density[i];
    mean[i] = a0 * lo + a1 * hi + a2 * (hi * hi - lo * lo) / 2.0;
    var[i] = a0 * lo * lo + a1 * hi * hi + a2 * (hi * hi * hi - lo * lo * lo) / 3.0 -
             mean[i] * mean[i];
  }
  out.mean0 = mean[0];
  out.mean1 = mean[1];
  out.var0 = var[0];
  out.var1 = var[1];
  return out;
}

}  // namespace rcisprt
