// Acceptance checks, one criterion per invocation: `acceptance N`.
// Prints the measurements followed by a single "criterion N: PASS|FAIL" line
// and exits nonzero on failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rcisprt/estimators.hpp"
#include "rcisprt/hypothesis.hpp"
#include "rcisprt/lfd.hpp"
#include "rcisprt/montecarlo.hpp"
#include "rcisprt/network.hpp"

using namespace rcisprt;

namespace {

struct Report {
  std::ostringstream log;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const std::vector<double> kGrid{1e-3, 1e-2, 1e-1};

// 99% one-sided binomial upper bound on an error fraction of `p` over `n` runs.
double binomial_upper(double p, long n) { return p + 2.326 * std::sqrt(p * (1 - p) / n); }

std::map<std::string, const Metrics*> index_rows(const std::vector<Metrics>& rows) {
  std::map<std::string, const Metrics*> m;
  for (const auto& r : rows) {
    m[r.variant + "/" + fmt("%g", r.alpha) + "/" + fmt("%g", r.beta) + "/" +
      hypothesis_label(r.hypothesis)] = &r;
  }
  return m;
}

const Metrics& row(const std::map<std::string, const Metrics*>& m, const std::string& variant,
                   double alpha, double beta, Hypothesis h) {
  return *m.at(variant + "/" + fmt("%g", alpha) + "/" + fmt("%g", beta) + "/" +
               hypothesis_label(h));
}

void print_rows(Report& rep, const std::vector<Metrics>& rows) {
  rep.log << "  variant  alpha    beta     hyp  arl        err_emp    truncated\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-8s %-8g %-8g %-4s %-10.2f %-10.5f %ld\n", r.variant.c_str(),
                  r.alpha, r.beta, hypothesis_label(r.hypothesis), r.arl, r.err_emp, r.truncated);
    rep.log << buf;
  }
}

// 1. LLR moments of the shift-in-mean test against a sampled oracle.
void criterion_1(Report& rep) {
  const auto test = GaussianBinaryTest::shift_in_mean(-1.0, 1.0, 2.0);
  const LlrMoments m = llr_moments(test);
  rep.log << "  formula: mean0 " << m.mean0 << ", mean1 " << m.mean1 << ", var0 " << m.var0
          << ", var1 " << m.var1 << '\n';
  rep.require(std::abs(m.mean0 + 1) < 1e-12 && std::abs(m.mean1 - 1) < 1e-12 &&
                  std::abs(m.var0 - 2) < 1e-12 && std::abs(m.var1 - 2) < 1e-12,
              "closed-form moments differ from (-1, 1, 2, 2)");

  constexpr long n = 1000000;
  std::mt19937_64 gen(20240611);
  for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
    const double mu = h == Hypothesis::H0 ? -1.0 : 1.0;
    std::normal_distribution<double> y(mu, std::sqrt(2.0));
    long double s1 = 0, s2 = 0;
    std::vector<double> x(n);
    for (auto& v : x) {
      v = static_cast<double>(oracle::llr(y(gen), -1, 2, 1, 2));
      s1 += v;
    }
    const long double mean = s1 / n;
    long double m4 = 0;
    for (double v : x) {
      const long double d = v - mean;
      s2 += d * d;
      m4 += d * d * d * d;
    }
    const long double var = s2 / (n - 1);
    m4 /= n;
    const double se_mean = std::sqrt(static_cast<double>(var / n));
    const double se_var = std::sqrt(static_cast<double>((m4 - var * var) / n));
    const double z_mean = (static_cast<double>(mean) - m.mean(h)) / se_mean;
    const double z_var = (static_cast<double>(var) - m.var(h)) / se_var;
    rep.log << "  " << hypothesis_label(h) << ": sampled mean " << static_cast<double>(mean)
            << " (z " << z_mean << "), sampled var " << static_cast<double>(var) << " (z " << z_var
            << ")\n";
    rep.require(std::abs(z_mean) <= 3, std::string("sampled mean under ") + hypothesis_label(h));
    rep.require(std::abs(z_var) <= 3, std::string("sampled variance under ") + hypothesis_label(h));
  }
}

// 2. First and second moments of the plain statistic on a fixed graph.
void criterion_2(Report& rep) {
  Rng topo(2718);
  const SensorGraph g = generate_geometric_graph(20, 0.6, topo);
  ExperimentConfig cfg;
  cfg.network.fixed = FixedTopology{g.size(), g.edges(), g.positions()};
  cfg.detection.variants = {VariantChoice::Plain};
  cfg.runs = 5000;
  cfg.seed = 31;
  const double xi = experiment_xi(cfg, experiment_topology(cfg));
  const LlrMoments m = llr_moments(cfg.test);

  std::vector<long> times(50);
  for (long t = 1; t <= 50; ++t) times[t - 1] = t;
  const auto sets = collect_statistic_snapshots(cfg, times);

  const long runs = cfg.runs;
  const int nodes = g.size();
  const double var_slack = 1 + 3 * std::sqrt(2.0 / (runs - 1));
  long mean_bad = 0, var_bad = 0, checks = 0;
  double worst_z = 0, worst_ratio = 0;
  for (const auto& set : sets) {
    const double mu = m.mean(set.hypothesis) * set.time;
    const double bound = m.var(set.hypothesis) * xi * set.time * var_slack;
    for (int k = 0; k < nodes; ++k) {
      long double s1 = 0, s2 = 0;
      for (long r = 0; r < runs; ++r) s1 += set.samples[r * nodes + k];
      const long double mean = s1 / runs;
      for (long r = 0; r < runs; ++r) {
        const long double d = set.samples[r * nodes + k] - mean;
        s2 += d * d;
      }
      const double var = static_cast<double>(s2 / (runs - 1));
      const double z = (static_cast<double>(mean) - mu) / std::sqrt(var / runs);
      worst_z = std::max(worst_z, std::abs(z));
      worst_ratio = std::max(worst_ratio, var / (m.var(set.hypothesis) * xi * set.time));
      mean_bad += std::abs(z) > 3;
      var_bad += var > bound;
      ++checks;
    }
  }
  rep.log << "  xi " << xi << ", " << checks << " (node, time, hypothesis) cells\n"
          << "  largest |mean z| " << worst_z << ", mean cells outside 3 SE: " << mean_bad << '\n'
          << "  largest var / (var_eta xi t) " << worst_ratio << " (allowed " << var_slack
          << "), cells over: " << var_bad << '\n';
  rep.require(mean_bad == 0, "mean outside 3 SE in " + std::to_string(mean_bad) + " cells");
  rep.require(var_bad == 0, "variance over bound in " + std::to_string(var_bad) + " cells");
}

// 3. Clean data: every variant meets every budget pair.
void criterion_3(Report& rep) {
  ExperimentConfig cfg;
  cfg.noise = ContaminationModel(0.0, 10.0);
  cfg.detection.variants = {VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Median,
                            VariantChoice::Huber, VariantChoice::Myriad};
  cfg.detection.lfd_epsilon = 0.1;
  cfg.detection.budgets.clear();
  for (double a : kGrid)
    for (double b : kGrid) cfg.detection.budgets.emplace_back(a, b);
  cfg.runs = 2000;
  cfg.seed = 3;
  const auto rows = run_experiment(cfg);
  print_rows(rep, rows);
  for (const auto& r : rows) {
    const double budget = r.hypothesis == Hypothesis::H0 ? r.alpha : r.beta;
    const double upper = binomial_upper(budget, cfg.runs);
    rep.require(r.err_emp <= upper, r.variant + " " + hypothesis_label(r.hypothesis) +
                                        fmt(" alpha %g", r.alpha) + fmt(" beta %g", r.beta) +
                                        fmt(": err %.5f", r.err_emp) + fmt(" > %.5f", upper));
    rep.require(r.truncated == 0, r.variant + " has truncated pairs");
  }
}

// 4. Shift in mean under 10% contamination.
void criterion_4(Report& rep) {
  ExperimentConfig cfg;
  cfg.noise = ContaminationModel(0.1, 10.0);
  cfg.detection.variants = {VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Median,
                            VariantChoice::Huber, VariantChoice::Myriad};
  cfg.detection.budgets.clear();
  for (double a : kGrid) cfg.detection.budgets.emplace_back(a, a);
  cfg.detection.threshold_method = ThresholdMethod::Numeric;
  cfg.detection.numeric.closed_form_fallback = true;
  cfg.network.mode = TopologyMode::PerRun;
  cfg.runs = 2000;
  cfg.seed = 4;
  const auto rows = run_experiment(cfg);
  print_rows(rep, rows);
  const auto at = index_rows(rows);

  for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
    const std::string hl = hypothesis_label(h);
    for (double a : kGrid) {
      const Metrics& plain = row(at, "plain", a, a, h);
      for (const char* v : {"median", "huber", "myriad"}) {
        const Metrics& r = row(at, v, a, a, h);
        rep.require(r.err_emp <= a, std::string(v) + " " + hl + fmt(" misses budget %g", a));
        const double ratio = r.arl / plain.arl;
        rep.log << "  " << hl << " alpha " << a << ": " << v << "/plain ARL " << ratio << '\n';
        rep.require(ratio <= 1.1, std::string(v) + " " + hl + fmt(" ARL ratio %.3f > 1.1", ratio));
      }
      const double lfd_ratio = row(at, "lfd", a, a, h).arl / plain.arl;
      rep.log << "  " << hl << " alpha " << a << ": lfd/plain ARL " << lfd_ratio << '\n';
      rep.require(lfd_ratio >= 2, hl + fmt(" lfd ARL ratio %.3f < 2", lfd_ratio));
    }
  }
  const double plain_worst = std::max(row(at, "plain", 1e-3, 1e-3, Hypothesis::H0).err_emp,
                                      row(at, "plain", 1e-3, 1e-3, Hypothesis::H1).err_emp);
  rep.log << "  plain error at 1e-3 (worse hypothesis): " << plain_worst << '\n';
  rep.require(plain_worst > 1e-3, "plain CISPRT meets the 1e-3 budget");
}

// 5. Shift in variance under 10% contamination.
void criterion_5(Report& rep) {
  ExperimentConfig cfg;
  cfg.scenario = "shift_in_variance";
  cfg.test = GaussianBinaryTest::shift_in_variance(1.0, 4.0);
  cfg.noise = ContaminationModel(0.1, 10.0);
  cfg.detection.variants = {VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Huber,
                            VariantChoice::Myriad};
  cfg.detection.budgets.clear();
  for (double a : kGrid) cfg.detection.budgets.emplace_back(a, a);
  cfg.detection.mass_approximation = MassApproximation::Exact;
  cfg.network.mode = TopologyMode::PerRun;
  cfg.runs = 2000;
  cfg.seed = 5;
  const auto rows = run_experiment(cfg);
  print_rows(rep, rows);
  const auto at = index_rows(rows);
  const std::vector<std::string> robust{"lfd", "huber", "myriad"};

  for (double a : kGrid) {
    for (const char* v : {"plain", "lfd", "huber", "myriad"}) {
      rep.require(row(at, v, a, a, Hypothesis::H1).err_emp <= a,
                  std::string(v) + fmt(" H1 misses budget %g", a));
    }
    const Metrics& plain = row(at, "plain", a, a, Hypothesis::H0);
    for (const auto& v : robust) {
      const Metrics& r = row(at, v, a, a, Hypothesis::H0);
      rep.require(r.err_emp <= a, v + fmt(" H0 misses budget %g", a));
      const double ratio = r.arl / plain.arl;
      rep.log << "  alpha " << a << ": " << v << "/plain H0 ARL " << ratio << ", " << v
              << " H0/H1 ARL " << r.arl / row(at, v, a, a, Hypothesis::H1).arl << '\n';
      rep.require(ratio >= 3 && ratio <= 15, v + fmt(" H0 ARL ratio %.3f", ratio) +
                                                 fmt(" outside [3, 15] at alpha %g", a));
    }
  }
  for (double a : {1e-3, 1e-2}) {
    rep.require(row(at, "plain", a, a, Hypothesis::H0).err_emp > a,
                fmt("plain CISPRT meets the H0 budget %g", a));
  }
}

// 6. The least favorable densities integrate to one.
void criterion_6(Report& rep) {
  const auto test = GaussianBinaryTest::shift_in_mean(-1.0, 1.0, 2.0);
  for (double eps : {0.05, 0.1, 0.2}) {
    const ClippedLrtParams p = solve_lfd_eps(test, eps);
    const auto q = [&](int i) {
      return oracle::integrate_line([&](oracle::real y) {
        const auto pair = oracle::lfd_pointwise(y, p.c0, p.c1, eps, -1, 2, 1, 2);
        return i == 0 ? pair.q0 : pair.q1;
      });
    };
    const double i0 = static_cast<double>(q(0)) - 1;
    const double i1 = static_cast<double>(q(1)) - 1;
    const double sym = p.lower + p.upper;
    rep.log << "  eps " << eps << ": c0 " << p.c0 << ", c1 " << p.c1 << ", int q0 - 1 = " << i0
            << ", int q1 - 1 = " << i1 << ", C0 + C1 = " << sym << '\n';
    rep.require(std::abs(i0) <= 1e-6, fmt("q0 not normalized at eps %g", eps));
    rep.require(std::abs(i1) <= 1e-6, fmt("q1 not normalized at eps %g", eps));
    rep.require(std::abs(sym) <= 1e-8, fmt("clipping band not symmetric at eps %g", eps));
  }
}

// 7. Estimator properties over random samples.
void criterion_7(Report& rep) {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> len(1, 21);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> z;
  std::cauchy_distribution<double> cauchy;

  const auto draw = [&](int n) {
    std::vector<double> v(n);
    const int family = static_cast<int>(u(gen) * 3);
    for (auto& x : v) {
      x = family == 0 ? z(gen) : family == 1 ? cauchy(gen) : std::round(4 * z(gen)) / 4;
      x = 5 * u(gen) - 2.5 + x;
    }
    return v;
  };
  const auto span = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  const auto shifted = [](std::vector<double> v, double a, double b) {
    for (auto& x : v) x = a * x + b;
    return v;
  };
  const std::vector<EstimatorKind> kinds{EstimatorKind::Mean, EstimatorKind::Median,
                                         EstimatorKind::HuberM, EstimatorKind::Myriad};

  std::map<std::string, long> bad;
  long vectors = 0, huber_outside = 0;
  double huber_overshoot = 0, widened_excess = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<double> v = draw(len(gen));
    ++vectors;
    const double b = 20 * u(gen) - 10;
    const double a = (u(gen) < 0.5 ? -1 : 1) * std::exp(4 * u(gen) - 2);
    const double scale = span(v) + std::abs(v[0]) + 1;
    for (auto k : kinds) {
      const double e = estimate_location(k, v);
      const bool exact = k == EstimatorKind::Mean || k == EstimatorKind::Median;
      const double tol_loc = exact ? 1e-12 * (scale + std::abs(b)) : 1e-6 * (scale + std::abs(b));
      const double tol_scale = (exact ? 1e-12 : 1e-6) * std::abs(a) * scale;
      if (std::abs(estimate_location(k, shifted(v, 1, b)) - (e + b)) > tol_loc)
        ++bad[std::string("location ") + to_string(k)];
      if (std::abs(estimate_location(k, shifted(v, a, 0)) - a * e) > tol_scale)
        ++bad[std::string("scale ") + to_string(k)];
    }

    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    for (double m : {0.01, 0.3, 3.0}) {
      MyriadConfig fixed;
      fixed.policy = MyriadConfig::Linearity::Fixed;
      fixed.m = m;
      const double y = myriad(v, fixed);
      if (y < *lo || y > *hi) ++bad["myriad hull (fixed m)"];
    }
    const double y = myriad(v);
    if (y < *lo || y > *hi) ++bad["myriad hull (mad m)"];

    const double med = median(v);
    const double s = mad_scale(v);
    if (s > 0) {
      double r = 0;
      for (double x : v) r = std::max(r, std::abs(x - med) / s);
      HuberConfig wide;
      wide.c = 2 * r + 1;
      if (std::abs(huber_m(v, wide).value - sample_mean(v)) > 1e-9 * scale)
        ++bad["huber unclipped mean"];
    }

    // Breakdown: k of 2k+1 entries replaced by +-1e9.
    if (v.size() % 2 == 1 && v.size() >= 3) {
      const std::size_t k = v.size() / 2;
      std::vector<double> w = v;
      for (std::size_t i = 0; i < k; ++i) w[i] = (u(gen) < 0.5 ? -1e9 : 1e9);
      const auto [clo, chi] = std::minmax_element(w.begin() + k, w.end());
      const double cmed = median(w);
      if (cmed < *clo || cmed > *chi) ++bad["median breakdown"];
      const double h = huber_m(w).value;
      const double over = std::max(*clo - h, h - *chi);
      if (over > 0) {
        ++huber_outside;
        huber_overshoot = std::max(huber_overshoot, over / (*chi - *clo + 1e-300));
      }
      widened_excess = std::max(widened_excess, over - HuberConfig{}.c * mad_scale(w));
      // Same-sign outliers cannot cancel, so the mean must leave the hull.
      std::vector<double> one_sided = w;
      std::fill(one_sided.begin(), one_sided.begin() + k, 1e9);
      if (sample_mean(one_sided) <= *chi) ++bad["mean stays inside the clean hull"];
    }
  }
  if (huber_outside) bad["huber breakdown"] = huber_outside;

  rep.log << "  " << vectors << " random vectors, lengths 1-21\n";
  for (const auto& [what, n] : bad) rep.log << "  " << what << ": " << n << " violations\n";
  rep.log << "  huber outside the clean hull in " << huber_outside
          << " breakdown cases, worst overshoot " << huber_overshoot
          << " x clean range; worst distance beyond hull widened by c * mad "
          << widened_excess << '\n';
  for (const auto& [what, n] : bad) rep.require(n == 0, what);
}

// 8. Same seed, same bytes, any thread count.
void criterion_8(Report& rep) {
  const auto csv = [](ExperimentConfig cfg, int threads) {
    cfg.threads = threads;
    std::ostringstream out;
    write_metrics_csv(out, run_experiment(cfg));
    return out.str();
  };
  ExperimentConfig mean;
  mean.noise = ContaminationModel(0.1, 10.0);
  mean.detection.variants = {VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Median,
                             VariantChoice::Huber, VariantChoice::Myriad};
  mean.detection.budgets = {ErrorBudget(1e-2, 1e-2), ErrorBudget(1e-1, 1e-3)};
  mean.runs = 150;
  mean.seed = 8;

  ExperimentConfig variance = mean;
  variance.scenario = "shift_in_variance";
  variance.test = GaussianBinaryTest::shift_in_variance(1.0, 4.0);
  variance.detection.variants = {VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Huber,
                                 VariantChoice::Myriad};
  variance.detection.mass_approximation = MassApproximation::Exact;
  variance.detection.threshold_method = ThresholdMethod::Numeric;
  variance.detection.numeric.closed_form_fallback = true;
  variance.network.mode = TopologyMode::PerRun;

  for (const auto* cfg : {&mean, &variance}) {
    const std::string serial = csv(*cfg, 1);
    for (int threads : {1, 2, 3, 8}) {
      const bool same = csv(*cfg, threads) == serial;
      rep.log << "  " << cfg->scenario << ", " << threads << " thread(s): "
              << (same ? "identical" : "DIFFERENT") << " (" << serial.size() << " bytes)\n";
      rep.require(same, cfg->scenario + " differs with " + std::to_string(threads) + " threads");
    }
  }
}

struct Criterion {
  void (*run)(Report&);
  double seconds;  // runtime limit; zero when the criterion sets none
};

const Criterion kCriteria[] = {{criterion_1, 10}, {criterion_2, 120}, {criterion_3, 600},
                               {criterion_4, 1200}, {criterion_5, 1800}, {criterion_6, 0},
                               {criterion_7, 0},   {criterion_8, 0}};

}  // namespace

int main(int argc, char** argv) {
  const int n = argc == 2 ? std::atoi(argv[1]) : 0;
  if (n < 1 || n > 8) {
    std::cerr << "usage: acceptance <criterion 1-8>\n";
    return 2;
  }
  const Criterion& c = kCriteria[n - 1];
  Report rep;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(rep);
  } catch (const std::exception& e) {
    rep.failures.push_back(std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (c.seconds > 0) {
    rep.require(elapsed < c.seconds, fmt("runtime %.1f s", elapsed) + fmt(" over %.0f s", c.seconds));
  }
  std::cout << rep.log.str();
  for (const auto& f : rep.failures) std::cout << "  failed: " << f << '\n';
  std::cout << "criterion " << n << ": " << (rep.failures.empty() ? "PASS" : "FAIL") << " ("
            << fmt("%.1f s", elapsed) << ")" << std::endl;
  return rep.failures.empty() ? 0 : 1;
}
