#ifndef RCISPRT_DETECTOR_HPP
#define RCISPRT_DETECTOR_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcisprt/estimators.hpp"
#include "rcisprt/hypothesis.hpp"
#include "rcisprt/lfd.hpp"
#include "rcisprt/network.hpp"
#include "rcisprt/thresholds.hpp"

namespace rcisprt {

/// Which update rule the agents run.
///
/// - Plain: S_k <- sum_l w_kl (S_l + eta_l).
/// - Lfd: as Plain with each eta_l clamped to the LFD clipping band.
/// - Estimator: S_k <- sum_l w_kl S_l + est{eta_l : l in N_k ∪ {k}}.
class DetectorVariant {
 public:
  enum class Kind { Plain, Lfd, Estimator };

  static DetectorVariant plain();
  static DetectorVariant lfd(ClippedLrtParams params);
  /// The median is a location estimate of the LLR mean only for symmetric
  /// LLR distributions; it is refused for tests with unequal variances
  /// unless `allow_unsuitable` is set.
  static DetectorVariant estimator(EstimatorKind estimator, const GaussianBinaryTest& test,
                                   EstimatorOptions options = {}, bool allow_unsuitable = false);

  Kind kind() const { return kind_; }
  EstimatorKind estimator_kind() const { return estimator_; }
  const ClippedLrtParams& lfd_params() const { return lfd_; }
  const EstimatorOptions& estimator_options() const { return options_; }
  /// "plain", "lfd", "mean", "median", "huber" or "myriad".
  std::string name() const;

 private:
  DetectorVariant() = default;

  Kind kind_ = Kind::Plain;
  ClippedLrtParams lfd_;
  EstimatorKind estimator_ = EstimatorKind::Mean;
  EstimatorOptions options_;
};

/// True if the median variant may be used on this test.
bool median_is_suitable(const GaussianBinaryTest& test);

struct AgentState {
  double statistic = 0.0;
  bool stopped = false;
  std::optional<Hypothesis> decision;
  std::optional<long> stopping_time;
};

struct DecisionRecord {
  std::optional<Hypothesis> decision;
  long stopping_time = 0;
  bool truncated = false;
};

/// All agents of one network test. Decisions are frozen at the first
/// threshold crossing (inclusive), but a stopped agent keeps updating and
/// sharing its statistic.
class NetworkDetector {
 public:
  NetworkDetector(const SensorGraph& graph, const CombinationMatrix& weights,
                  Thresholds thresholds, DetectorVariant variant);

  /// Advances one time step with the raw per-node LLRs.
  void step(const Eigen::Ref<const Eigen::VectorXd>& innovations);

  int size() const { return static_cast<int>(statistics_.size()); }
  long time() const { return time_; }
  bool all_stopped() const { return active_ == 0; }
  const Eigen::VectorXd& statistics() const { return statistics_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const Thresholds& thresholds() const { return thresholds_; }
  const DetectorVariant& variant() const { return variant_; }

 private:
  Eigen::MatrixXd weights_;
  std::vector<std::vector<int>> hoods_;
  Thresholds thresholds_;
  DetectorVariant variant_;
  Eigen::VectorXd statistics_;
  Eigen::VectorXd scratch_;
  std::vector<double> gather_;
  std::vector<AgentState> agents_;
  long time_ = 0;
  int active_ = 0;
};

/// Fills the per-node LLR vector for time t (1-based).
using InnovationSource = std::function<void(long t, Eigen::VectorXd& out)>;

/// Steps until every agent has stopped or t_max steps have run. Agents still
/// undecided at t_max are reported as truncated.
std::vector<DecisionRecord> run_until_all_stop(NetworkDetector& detector,
                                               const InnovationSource& source, long t_max);

}  // namespace rcisprt

#endif  // RCISPRT_DETECTOR_HPP
