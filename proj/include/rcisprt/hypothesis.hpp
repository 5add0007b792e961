#ifndef RCISPRT_HYPOTHESIS_HPP
#define RCISPRT_HYPOTHESIS_HPP

#include <optional>
#include <string>

#include "rcisprt/numerics.hpp"

namespace rcisprt {

enum class Hypothesis { H0 = 0, H1 = 1 };

inline int index_of(Hypothesis h) { return static_cast<int>(h); }

enum class TestKind {
  ShiftInMean,      // sigma0 == sigma1
  ShiftInVariance,  // mu0 == mu1
  General,
};

/// Pair of Gaussian hypotheses H_i : Y ~ N(mu_i, var_i).
class GaussianBinaryTest {
 public:
  struct AllowDegenerate {};

  GaussianBinaryTest(double mu0, double var0, double mu1, double var1);
  /// Permits identical hypotheses; only meaningful for limit checks.
  GaussianBinaryTest(double mu0, double var0, double mu1, double var1, AllowDegenerate);

  /// H0 : N(mu0, sigma2), H1 : N(mu1, sigma2).
  static GaussianBinaryTest shift_in_mean(double mu0, double mu1, double sigma2);
  /// H0 : N(0, noise_var), H1 : N(0, signal_var + noise_var).
  static GaussianBinaryTest shift_in_variance(double noise_var, double signal_var);

  double mean(Hypothesis h) const { return h == Hypothesis::H0 ? mu0_ : mu1_; }
  double variance(Hypothesis h) const { return h == Hypothesis::H0 ? var0_ : var1_; }
  double mu0() const { return mu0_; }
  double mu1() const { return mu1_; }
  double var0() const { return var0_; }
  double var1() const { return var1_; }

  TestKind kind() const;
  /// The LLR of a nominal sample is symmetric about its mean only when the
  /// variances agree; otherwise it is a shifted, scaled chi-square.
  bool has_symmetric_llr() const { return var0_ == var1_; }

 private:
  double mu0_;
  double var0_;
  double mu1_;
  double var1_;
};

const char* to_string(TestKind kind);

/// log p1(y) / p0(y).
double llr(const GaussianBinaryTest& test, double y);

/// Coefficients of the LLR as a quadratic in the measurement: a*y^2 + b*y + c.
struct LlrQuadratic {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};
LlrQuadratic llr_quadratic(const GaussianBinaryTest& test);

/// Exact P_i(llr(Y) <= level) for a nominal sample under hypothesis h.
double llr_cdf(const GaussianBinaryTest& test, Hypothesis h, double level);

/// Mean and variance of the LLR under each hypothesis.
struct LlrMoments {
  double mean0 = 0.0;
  double mean1 = 0.0;
  double var0 = 0.0;
  double var1 = 0.0;

  double mean(Hypothesis h) const { return h == Hypothesis::H0 ? mean0 : mean1; }
  double var(Hypothesis h) const { return h == Hypothesis::H0 ? var0 : var1; }
};

/// Closed-form LLR moments of a Gaussian binary test.
LlrMoments llr_moments(const GaussianBinaryTest& test);

struct GaussianParams {
  double mean = 0.0;
  double variance = 1.0;
};

/// epsilon-contamination: with probability epsilon a sample comes from the
/// contaminating Gaussian instead of the nominal one. By default the
/// contaminant keeps the true mean and inflates the variance by kappa.
class ContaminationModel {
 public:
  ContaminationModel() = default;
  ContaminationModel(double epsilon, double kappa);
  ContaminationModel(double epsilon, GaussianParams contaminant);

  double epsilon() const { return epsilon_; }
  double kappa() const { return kappa_; }
  const std::optional<GaussianParams>& contaminant() const { return contaminant_; }

 private:
  double epsilon_ = 0.0;
  double kappa_ = 10.0;
  std::optional<GaussianParams> contaminant_;
};

/// The hypothesis that generates the data and its nominal mean and std.
struct TrueState {
  Hypothesis hypothesis = Hypothesis::H0;
  double mean = 0.0;
  double stddev = 1.0;
};

TrueState true_state(const GaussianBinaryTest& test, Hypothesis h);

/// One measurement. Always consumes one uniform and one normal draw so that
/// streams stay aligned across variants sharing a seed.
double sample_measurement(const TrueState& state, const ContaminationModel& cm, Rng& rng);

}  // namespace rcisprt

#endif  // RCISPRT_HYPOTHESIS_HPP
