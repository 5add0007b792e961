#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rcisprt/errors.hpp"
#include "rcisprt/montecarlo.hpp"

using namespace rcisprt;

namespace {

ExperimentConfig small(std::vector<VariantChoice> variants, long runs = 200) {
  ExperimentConfig cfg;
  cfg.noise = ContaminationModel(0.1, 10.0);
  cfg.detection.variants = std::move(variants);
  cfg.detection.budgets = {ErrorBudget(0.1, 0.1), ErrorBudget(0.01, 0.01)};
  cfg.runs = runs;
  cfg.seed = 42;
  return cfg;
}

std::string csv(const std::vector<Metrics>& rows) {
  std::ostringstream out;
  write_metrics_csv(out, rows);
  return out.str();
}

}  // namespace

TEST(Harness, CleanPlainMeetsLooseBudgets) {
  ExperimentConfig cfg;
  cfg.noise = ContaminationModel(0.0, 10.0);
  cfg.detection.variants = {VariantChoice::Plain};
  cfg.detection.budgets = {ErrorBudget(0.1, 0.1)};
  cfg.runs = 1000;
  const auto rows = run_experiment(cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_LE(r.err_emp, 0.1);
    EXPECT_EQ(r.truncated, 0);
    EXPECT_EQ(r.decided, 20 * 1000);
    EXPECT_GE(r.arl, 1.0);
  }
}

TEST(Harness, RejectsZeroRuns) {
  auto cfg = small({VariantChoice::Plain});
  cfg.runs = 0;
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Harness, RejectsMedianForShiftInVariance) {
  auto cfg = small({VariantChoice::Median});
  cfg.test = GaussianBinaryTest::shift_in_variance(1, 4);
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  cfg.detection.allow_unsuitable_median = true;
  cfg.runs = 5;
  EXPECT_NO_THROW(run_experiment(cfg));
}

TEST(Harness, SerialAndParallelAreByteIdentical) {
  auto cfg = small({VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Huber}, 60);
  cfg.threads = 1;
  const auto serial = csv(run_experiment(cfg));
  cfg.threads = 4;
  const auto parallel = csv(run_experiment(cfg));
  EXPECT_EQ(serial, parallel);
  cfg.seed = 43;
  EXPECT_NE(csv(run_experiment(cfg)), serial);
}

TEST(Harness, RowLayoutAndCsvHeader) {
  auto cfg = small({VariantChoice::Plain, VariantChoice::Myriad}, 10);
  const auto rows = run_experiment(cfg);
  ASSERT_EQ(rows.size(), 2u * 2u * 2u);
  EXPECT_EQ(rows[0].variant, "plain");
  EXPECT_EQ(rows[0].hypothesis, Hypothesis::H0);
  EXPECT_EQ(rows[1].hypothesis, Hypothesis::H1);
  EXPECT_DOUBLE_EQ(rows[2].alpha, 0.01);
  EXPECT_EQ(rows[4].variant, "myriad");
  const auto text = csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "scenario,variant,alpha,beta,epsilon,kappa,hypothesis,n_runs,arl,err_emp,truncated,seed");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
}

TEST(Harness, ArlShrinksAsBudgetsLoosen) {
  auto cfg = small({VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Median}, 100);
  cfg.detection.budgets = {ErrorBudget(1e-3, 1e-3), ErrorBudget(1e-2, 1e-2), ErrorBudget(0.1, 0.1)};
  cfg.hypotheses = {Hypothesis::H0};
  const auto rows = run_experiment(cfg);
  for (std::size_t v = 0; v < 3; ++v) {
    EXPECT_GT(rows[3 * v].arl, rows[3 * v + 1].arl);
    EXPECT_GT(rows[3 * v + 1].arl, rows[3 * v + 2].arl);
  }
}

TEST(Harness, TruncatedPairsAreCounted) {
  auto cfg = small({VariantChoice::Plain}, 5);
  cfg.detection.t_max = 1;
  cfg.detection.budgets = {ErrorBudget(1e-3, 1e-3)};
  const auto rows = run_experiment(cfg);
  for (const auto& r : rows) {
    EXPECT_EQ(r.decided + r.truncated, 100);
    EXPECT_GT(r.truncated, 0);
  }
}

TEST(Harness, PerRunTopologyVariesAcrossRuns) {
  auto cfg = small({VariantChoice::Plain}, 4);
  cfg.network.mode = TopologyMode::PerRun;
  EXPECT_NE(run_topology(cfg, 0).edges(), run_topology(cfg, 1).edges());
  EXPECT_EQ(run_topology(cfg, 2).edges(), run_topology(cfg, 2).edges());
  cfg.network.mode = TopologyMode::PerExperiment;
  EXPECT_EQ(run_topology(cfg, 0).edges(), run_topology(cfg, 1).edges());
  cfg.network.mode = TopologyMode::PerRun;
  EXPECT_NO_THROW(run_experiment(cfg));
}

TEST(Harness, FixedTopology) {
  auto cfg = small({VariantChoice::Plain}, 20);
  cfg.network.fixed = FixedTopology{3, {{0, 1}, {1, 2}}, {}};
  EXPECT_EQ(experiment_topology(cfg).size(), 3);
  EXPECT_NEAR(experiment_xi(cfg, experiment_topology(cfg)), 0.5, 1e-15);
  const auto rows = run_experiment(cfg);
  EXPECT_EQ(rows[0].decided + rows[0].truncated, 60);
}

TEST(Harness, LfdPlanUsesClippedMoments) {
  auto cfg = small({VariantChoice::Plain, VariantChoice::Lfd});
  const auto plans = plan_variants(cfg);
  ASSERT_EQ(plans.size(), 2u);
  EXPECT_FALSE(plans[0].lfd);
  ASSERT_TRUE(plans[1].lfd);
  EXPECT_GT(plans[1].moments.mean0, plans[1].lfd->lower);
  EXPECT_LT(plans[1].moments.var0, plans[0].moments.var0);
  cfg.detection.lfd_epsilon = 0.2;
  EXPECT_DOUBLE_EQ(plan_variants(cfg)[1].lfd->epsilon, 0.2);
}

TEST(Snapshots, EmptyTimeList) {
  EXPECT_TRUE(collect_statistic_snapshots(small({VariantChoice::Plain}), {}).empty());
}

TEST(Snapshots, FirstStepMeanIsLlrMean) {
  auto cfg = small({VariantChoice::Plain}, 2000);
  cfg.noise = ContaminationModel(0.0, 10.0);
  const auto sets = collect_statistic_snapshots(cfg, {1});
  ASSERT_EQ(sets.size(), 2u);
  for (const auto& s : sets) {
    ASSERT_EQ(s.samples.size(), 2000u * 20u);
    double sum = 0.0;
    for (double x : s.samples) sum += x;
    const double target = s.hypothesis == Hypothesis::H0 ? -1.0 : 1.0;
    // Nodes of one run are correlated; bound the SE by the per-run spread.
    EXPECT_NEAR(sum / s.samples.size(), target, 4.0 * std::sqrt(2.0 / 2000));
  }
}

TEST(Snapshots, LfdStatisticsStayInsideTheClippedCone) {
  auto cfg = small({VariantChoice::Lfd}, 50);
  const auto plans = plan_variants(cfg);
  const double lo = plans[0].lfd->lower, hi = plans[0].lfd->upper;
  const auto sets = collect_statistic_snapshots(cfg, {1, 5, 20});
  ASSERT_EQ(sets.size(), 6u);
  for (const auto& s : sets) {
    for (double x : s.samples) {
      EXPECT_GE(x, s.time * lo - 1e-9);
      EXPECT_LE(x, s.time * hi + 1e-9);
    }
  }
  EXPECT_THROW(collect_statistic_snapshots(cfg, {0}), ConfigError);
}

TEST(Variants, NamesAndDefaults) {
  EXPECT_EQ(parse_variant("myriad"), VariantChoice::Myriad);
  EXPECT_FALSE(parse_variant("wald"));
  EXPECT_EQ(default_variants(GaussianBinaryTest::shift_in_mean(-1, 1, 2)).size(), 5u);
  const auto v = default_variants(GaussianBinaryTest::shift_in_variance(1, 4));
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(std::count(v.begin(), v.end(), VariantChoice::Median), 0);
}

TEST(Csv, FullPrecisionRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(std::nan("")), "nan");
}
