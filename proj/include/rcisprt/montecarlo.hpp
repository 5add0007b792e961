#ifndef RCISPRT_MONTECARLO_HPP
#define RCISPRT_MONTECARLO_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rcisprt/detector.hpp"
#include "rcisprt/estimators.hpp"
#include "rcisprt/hypothesis.hpp"
#include "rcisprt/lfd.hpp"
#include "rcisprt/network.hpp"
#include "rcisprt/thresholds.hpp"

namespace rcisprt {

enum class VariantChoice { Plain, Lfd, Mean, Median, Huber, Myriad };

const char* to_string(VariantChoice v);
std::optional<VariantChoice> parse_variant(const std::string& name);

/// Variants applicable to a test: the five of the shift-in-mean study, minus
/// the median when the LLR is skewed.
std::vector<VariantChoice> default_variants(const GaussianBinaryTest& test);

enum class TopologyMode { PerExperiment, PerRun };

struct FixedTopology {
  int nodes = 0;
  std::vector<Edge> edges;
  std::vector<Position> positions;
};

struct NetworkConfig {
  int nodes = 20;
  double radius = 0.6;
  TopologyMode mode = TopologyMode::PerExperiment;
  int max_attempts = 10000;
  std::optional<FixedTopology> fixed;
};

struct DetectionConfig {
  std::vector<VariantChoice> variants{VariantChoice::Plain};
  std::vector<ErrorBudget> budgets{ErrorBudget(0.01, 0.01)};
  ThresholdMethod threshold_method = ThresholdMethod::ClosedForm;
  NumericThresholdOptions numeric;
  XiMethod xi_method = XiMethod::MaxNorm;
  int xi_power = 1;
  /// Contamination level the LFDs are designed for; defaults to the noise
  /// epsilon.
  std::optional<double> lfd_epsilon;
  MassApproximation mass_approximation = MassApproximation::AsPrinted;
  LfdSolverOptions lfd_solver;
  EstimatorOptions estimators;
  bool allow_unsuitable_median = false;
  long t_max = 100000;
};

struct ExperimentConfig {
  std::string scenario = "shift_in_mean";
  GaussianBinaryTest test = GaussianBinaryTest::shift_in_mean(-1.0, 1.0, 2.0);
  std::vector<Hypothesis> hypotheses{Hypothesis::H0, Hypothesis::H1};
  ContaminationModel noise;
  NetworkConfig network;
  DetectionConfig detection;
  long runs = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Throws ConfigError describing the first invalid field.
void validate(const ExperimentConfig& cfg);

/// One row per variant x budget x hypothesis.
struct Metrics {
  std::string scenario;
  std::string variant;
  double alpha = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double kappa = 0.0;
  Hypothesis hypothesis = Hypothesis::H0;
  long n_runs = 0;
  /// Mean stopping time over decided (node, run) pairs.
  double arl = 0.0;
  /// Wrong-decision fraction over decided (node, run) pairs: P_FA under H0,
  /// P_MD under H1.
  double err_emp = 0.0;
  long truncated = 0;
  std::uint64_t seed = 0;

  long decided = 0;
  long wrong = 0;
  /// Standard error of the ARL, treating pairs as independent.
  double arl_se = 0.0;
  /// Wrong-decision fraction of node k (decided pairs only).
  std::vector<double> per_node_err;
};

/// Everything a variant needs before the first run: the detector variant,
/// the moments its thresholds are built from, and the LFD parameters when
/// relevant.
struct VariantPlan {
  VariantChoice choice;
  DetectorVariant variant;
  LlrMoments moments;
  std::optional<ClippedLrtParams> lfd;
  std::optional<ExcessMass> masses;
};

std::vector<VariantPlan> plan_variants(const ExperimentConfig& cfg);

/// The per-experiment topology (fixed or drawn from the master seed).
SensorGraph experiment_topology(const ExperimentConfig& cfg);

/// Topology of run `run` in per-run mode.
SensorGraph run_topology(const ExperimentConfig& cfg, long run);

double experiment_xi(const ExperimentConfig& cfg, const SensorGraph& graph);

/// Runs the Monte Carlo experiment. Run r of hypothesis h draws its
/// measurements from a stream seeded by (seed, r, h), shared by every
/// variant and budget, so results do not depend on thread count.
std::vector<Metrics> run_experiment(const ExperimentConfig& cfg);

/// Samples of S_k(t) over all nodes and runs at the requested times.
struct SnapshotSet {
  std::string variant;
  Hypothesis hypothesis = Hypothesis::H0;
  long time = 0;
  std::vector<double> samples;
};

/// Uses the first budget's thresholds; statistics evolve for max(times)
/// steps irrespective of stopping.
std::vector<SnapshotSet> collect_statistic_snapshots(const ExperimentConfig& cfg,
                                                     const std::vector<long>& times);

const char* hypothesis_label(Hypothesis h);

/// CSV with header
/// scenario,variant,alpha,beta,epsilon,kappa,hypothesis,n_runs,arl,err_emp,truncated,seed
void write_metrics_csv(std::ostream& out, const std::vector<Metrics>& rows);

std::string format_double(double v);

}  // namespace rcisprt

#endif  // RCISPRT_MONTECARLO_HPP
