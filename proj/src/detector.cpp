#include "rcisprt/detector.hpp"

#include <stdexcept>

#include "rcisprt/errors.hpp"

namespace rcisprt {

DetectorVariant DetectorVariant::plain() { return DetectorVariant{}; }

DetectorVariant DetectorVariant::lfd(ClippedLrtParams params) {
  DetectorVariant v;
  v.kind_ = Kind::Lfd;
  v.lfd_ = params;
  return v;
}

bool median_is_suitable(const GaussianBinaryTest& test) { return test.has_symmetric_llr(); }

DetectorVariant DetectorVariant::estimator(EstimatorKind estimator, const GaussianBinaryTest& test,
                                           EstimatorOptions options, bool allow_unsuitable) {
  if (estimator == EstimatorKind::Median && !allow_unsuitable && !median_is_suitable(test)) {
    throw ConfigError(
        "median variant is unsuitable for this test: the LLR is skewed when the variances "
        "differ, and the median only estimates the mean of symmetric distributions");
  }
  DetectorVariant v;
  v.kind_ = Kind::Estimator;
  v.estimator_ = estimator;
  v.options_ = options;
  return v;
}

std::string DetectorVariant::name() const {
  switch (kind_) {
    case Kind::Plain:
      return "plain";
    case Kind::Lfd:
      return "lfd";
    case Kind::Estimator:
      return to_string(estimator_);
  }
  return "plain";
}

NetworkDetector::NetworkDetector(const SensorGraph& graph, const CombinationMatrix& weights,
                                 Thresholds thresholds, DetectorVariant variant)
    : weights_(weights.weights()), thresholds_(thresholds), variant_(std::move(variant)) {
  const int n = graph.size();
  if (weights.size() != n) throw std::invalid_argument("NetworkDetector: W does not match graph");
  if (!(thresholds.lower < thresholds.upper)) {
    throw std::invalid_argument("NetworkDetector: need lower threshold < upper threshold");
  }
  if (!(thresholds.lower < 0.0 && thresholds.upper > 0.0)) {
    throw std::invalid_argument("NetworkDetector: need lower < 0 < upper");
  }
  hoods_.reserve(n);
  std::size_t widest = 0;
  for (int k = 0; k < n; ++k) {
    hoods_.push_back(graph.closed_neighborhood(k));
    widest = std::max(widest, hoods_.back().size());
  }
  gather_.resize(widest);
  statistics_ = Eigen::VectorXd::Zero(n);
  scratch_ = Eigen::VectorXd::Zero(n);
  agents_.assign(n, AgentState{});
  active_ = n;
}

void NetworkDetector::step(const Eigen::Ref<const Eigen::VectorXd>& innovations) {
  if (innovations.size() != statistics_.size()) {
    throw std::invalid_argument("NetworkDetector::step: innovation vector has wrong length");
  }
  switch (variant_.kind()) {
    case DetectorVariant::Kind::Plain:
      scratch_ = statistics_ + innovations;
      statistics_.noalias() = weights_ * scratch_;
      break;
    case DetectorVariant::Kind::Lfd: {
      const auto& p = variant_.lfd_params();
      scratch_ = statistics_ + innovations.unaryExpr([&p](double e) { return clip_llr(p, e); });
      statistics_.noalias() = weights_ * scratch_;
      break;
    }
    case DetectorVariant::Kind::Estimator: {
      scratch_.noalias() = weights_ * statistics_;
      for (int k = 0; k < size(); ++k) {
        const auto& hood = hoods_[k];
        for (std::size_t j = 0; j < hood.size(); ++j) gather_[j] = innovations[hood[j]];
        scratch_[k] += estimate_location(variant_.estimator_kind(),
                                         std::span<const double>(gather_.data(), hood.size()),
                                         variant_.estimator_options());
      }
      statistics_.swap(scratch_);
      break;
    }
  }
  ++time_;
  for (int k = 0; k < size(); ++k) {
    auto& agent = agents_[k];
    agent.statistic = statistics_[k];
    if (agent.stopped) continue;
    if (agent.statistic <= thresholds_.lower) {
      agent.decision = Hypothesis::H0;
    } else if (agent.statistic >= thresholds_.upper) {
      agent.decision = Hypothesis::H1;
    } else {
      continue;
    }
    agent.stopped = true;
    agent.stopping_time = time_;
    --active_;
  }
}

std::vector<DecisionRecord> run_until_all_stop(NetworkDetector& detector,
                                               const InnovationSource& source, long t_max) {
  if (t_max < 1) throw std::invalid_argument("run_until_all_stop: t_max must be >= 1");
  Eigen::VectorXd eta(detector.size());
  while (!detector.all_stopped() && detector.time() < t_max) {
    source(detector.time() + 1, eta);
    detector.step(eta);
  }
  std::vector<DecisionRecord> out(detector.size());
  for (int k = 0; k < detector.size(); ++k) {
    const auto& a = detector.agents()[k];
    if (a.stopped) {
      out[k].decision = a.decision;
      out[k].stopping_time = *a.stopping_time;
    } else {
      out[k].truncated = true;
      out[k].stopping_time = detector.time();
    }
  }
  return out;
}

}  // namespace rcisprt
