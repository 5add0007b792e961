#include "rcisprt/hypothesis.hpp"

#include <cmath>
#include <stdexcept>

namespace rcisprt {

namespace {

void check_variances(double var0, double var1) {
  if (!(var0 > 0.0) || !(var1 > 0.0) || !std::isfinite(var0) || !std::isfinite(var1)) {
    throw std::invalid_argument("GaussianBinaryTest: variances must be positive and finite");
  }
}

}  // namespace

GaussianBinaryTest::GaussianBinaryTest(double mu0, double var0, double mu1, double var1)
    : mu0_(mu0), var0_(var0), mu1_(mu1), var1_(var1) {
  check_variances(var0, var1);
  if (mu0 == mu1 && var0 == var1) {
    throw std::invalid_argument("GaussianBinaryTest: hypotheses are identical");
  }
}

GaussianBinaryTest::GaussianBinaryTest(double mu0, double var0, double mu1, double var1,
                                       AllowDegenerate)
    : mu0_(mu0), var0_(var0), mu1_(mu1), var1_(var1) {
  check_variances(var0, var1);
}

GaussianBinaryTest GaussianBinaryTest::shift_in_mean(double mu0, double mu1, double sigma2) {
  if (mu0 == mu1) throw std::invalid_argument("shift_in_mean: means must differ");
  return GaussianBinaryTest(mu0, sigma2, mu1, sigma2);
}

GaussianBinaryTest GaussianBinaryTest::shift_in_variance(double noise_var, double signal_var) {
  if (!(signal_var > 0.0)) throw std::invalid_argument("shift_in_variance: signal variance must be > 0");
  return GaussianBinaryTest(0.0, noise_var, 0.0, signal_var + noise_var);
}

TestKind GaussianBinaryTest::kind() const {
  if (var0_ == var1_) return TestKind::ShiftInMean;
  if (mu0_ == mu1_) return TestKind::ShiftInVariance;
  return TestKind::General;
}

const char* to_string(TestKind kind) {
  switch (kind) {
    case TestKind::ShiftInMean:
      return "shift_in_mean";
    case TestKind::ShiftInVariance:
      return "shift_in_variance";
    case TestKind::General:
      return "general";
  }
  return "general";
}

double llr(const GaussianBinaryTest& t, double y) {
  const double d0 = y - t.mu0();
  const double d1 = y - t.mu1();
  return (t.var1() * d0 * d0 - t.var0() * d1 * d1) / (2.0 * t.var0() * t.var1()) +
         0.5 * std::log(t.var0() / t.var1());
}

LlrQuadratic llr_quadratic(const GaussianBinaryTest& t) {
  const double v0 = t.var0();
  const double v1 = t.var1();
  const double denom = 2.0 * v0 * v1;
  LlrQuadratic q;
  q.a = (v1 - v0) / denom;
  q.b = -2.0 * (v1 * t.mu0() - v0 * t.mu1()) / denom;
  q.c = (v1 * t.mu0() * t.mu0() - v0 * t.mu1() * t.mu1()) / denom + 0.5 * std::log(v0 / v1);
  return q;
}

double llr_cdf(const GaussianBinaryTest& test, Hypothesis h, double level) {
  if (level == -INFINITY) return 0.0;
  if (level == INFINITY) return 1.0;
  const auto [a, b, c] = llr_quadratic(test);
  const double m = test.mean(h);
  const double s = std::sqrt(test.variance(h));
  auto cdf = [&](double y) { return normal_cdf((y - m) / s); };

  if (a == 0.0) {
    if (b == 0.0) return c <= level ? 1.0 : 0.0;
    const double root = (level - c) / b;
    return b > 0.0 ? cdf(root) : q_function((root - m) / s);
  }
  const double disc = b * b - 4.0 * a * (c - level);
  if (disc <= 0.0) return a > 0.0 ? 0.0 : 1.0;
  const double sq = std::sqrt(disc);
  // Numerically stable roots.
  const double qv = -0.5 * (b + std::copysign(sq, b));
  double r1 = qv / a;
  double r2 = (qv != 0.0) ? (c - level) / qv : -r1;
  if (r1 > r2) std::swap(r1, r2);
  const double inside = cdf(r2) - cdf(r1);
  return a > 0.0 ? inside : 1.0 - inside;
}

LlrMoments llr_moments(const GaussianBinaryTest& t) {
  const double v0 = t.var0();
  const double v1 = t.var1();
  const double d2 = (t.mu0() - t.mu1()) * (t.mu0() - t.mu1());
  const double log_ratio = 0.5 * std::log(v0 / v1);
  LlrMoments m;
  m.mean0 = -(d2 + v0 - v1) / (2.0 * v1) + log_ratio;
  m.mean1 = (d2 + v1 - v0) / (2.0 * v0) + log_ratio;
  m.var0 = 0.5 * (1.0 + (v0 * v0) / (v1 * v1)) + d2 * v0 / (v1 * v1) - v0 / v1;
  m.var1 = 0.5 * (1.0 + (v1 * v1) / (v0 * v0)) + d2 * v1 / (v0 * v0) - v1 / v0;
  return m;
}

ContaminationModel::ContaminationModel(double epsilon, double kappa)
    : epsilon_(epsilon), kappa_(kappa) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("ContaminationModel: epsilon must lie in [0, 1)");
  }
  if (!(kappa > 0.0)) throw std::invalid_argument("ContaminationModel: kappa must be > 0");
}

ContaminationModel::ContaminationModel(double epsilon, GaussianParams contaminant)
    : ContaminationModel(epsilon, 1.0) {
  if (!(contaminant.variance > 0.0)) {
    throw std::invalid_argument("ContaminationModel: contaminant variance must be > 0");
  }
  contaminant_ = contaminant;
}

TrueState true_state(const GaussianBinaryTest& test, Hypothesis h) {
  return TrueState{h, test.mean(h), std::sqrt(test.variance(h))};
}

double sample_measurement(const TrueState& state, const ContaminationModel& cm, Rng& rng) {
  const double u = uniform01(rng);
  const double z = standard_normal(rng);
  if (u < cm.epsilon()) {
    if (cm.contaminant()) {
      return cm.contaminant()->mean + std::sqrt(cm.contaminant()->variance) * z;
    }
    return state.mean + std::sqrt(cm.kappa()) * state.stddev * z;
  }
  return state.mean + state.stddev * z;
}

}  // namespace rcisprt
