#include "rcisprt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "rcisprt/errors.hpp"

namespace rcisprt {

namespace {

constexpr std::uint64_t kTopologyStream = 0x70B0106EULL;
constexpr std::uint64_t kRunTopologyStream = 0x5EED7090ULL;

std::uint64_t run_seed(std::uint64_t master, long run, Hypothesis h) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(run)),
                     static_cast<std::uint64_t>(index_of(h)) + 1);
}

}  // namespace

const char* to_string(VariantChoice v) {
  switch (v) {
    case VariantChoice::Plain:
      return "plain";
    case VariantChoice::Lfd:
      return "lfd";
    case VariantChoice::Mean:
      return "mean";
    case VariantChoice::Median:
      return "median";
    case VariantChoice::Huber:
      return "huber";
    case VariantChoice::Myriad:
      return "myriad";
  }
  return "plain";
}

std::optional<VariantChoice> parse_variant(const std::string& name) {
  for (auto v : {VariantChoice::Plain, VariantChoice::Lfd, VariantChoice::Mean,
                 VariantChoice::Median, VariantChoice::Huber, VariantChoice::Myriad}) {
    if (name == to_string(v)) return v;
  }
  return std::nullopt;
}

std::vector<VariantChoice> default_variants(const GaussianBinaryTest& test) {
  std::vector<VariantChoice> out{VariantChoice::Plain, VariantChoice::Lfd};
  if (median_is_suitable(test)) out.push_back(VariantChoice::Median);
  out.push_back(VariantChoice::Huber);
  out.push_back(VariantChoice::Myriad);
  return out;
}

const char* hypothesis_label(Hypothesis h) { return h == Hypothesis::H0 ? "H0" : "H1"; }

void validate(const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("execution.runs: need at least one Monte Carlo run");
  if (cfg.threads < 1) throw ConfigError("execution.threads: must be >= 1");
  if (cfg.hypotheses.empty()) throw ConfigError("scenario.true_hypothesis: no hypothesis selected");
  if (cfg.detection.variants.empty()) throw ConfigError("detection.variants: empty list");
  if (cfg.detection.budgets.empty()) throw ConfigError("detection.budgets: empty list");
  if (cfg.detection.t_max < 1) throw ConfigError("detection.t_max: must be >= 1");
  if (cfg.detection.xi_power < 1) throw ConfigError("detection.xi.power: must be >= 1");
  if (!cfg.network.fixed) {
    if (cfg.network.nodes < 2) throw ConfigError("network.nodes: need at least two nodes");
    if (!(cfg.network.radius > 0.0) || cfg.network.radius > std::sqrt(2.0)) {
      throw ConfigError("network.radius: must lie in (0, sqrt(2)]");
    }
  }
  const double design_eps = cfg.detection.lfd_epsilon.value_or(cfg.noise.epsilon());
  const bool wants_lfd = std::find(cfg.detection.variants.begin(), cfg.detection.variants.end(),
                                   VariantChoice::Lfd) != cfg.detection.variants.end();
  if (wants_lfd && !(design_eps >= 0.0 && design_eps < 0.5)) {
    throw ConfigError("detection.lfd.epsilon: LFD design requires epsilon in [0, 0.5)");
  }
  for (auto v : cfg.detection.variants) {
    if (v == VariantChoice::Median && !cfg.detection.allow_unsuitable_median &&
        !median_is_suitable(cfg.test)) {
      throw ConfigError(
          "detection.variants: median is not applicable to a test with unequal variances "
          "(skewed LLR; the median estimates the mean of symmetric distributions only). Set "
          "detection.allow_unsuitable_median to override");
    }
  }
}

std::vector<VariantPlan> plan_variants(const ExperimentConfig& cfg) {
  const auto& det = cfg.detection;
  std::vector<VariantPlan> plans;
  const LlrMoments nominal = llr_moments(cfg.test);
  std::optional<ClippedLrtParams> lfd_params;
  std::optional<ExcessMass> lfd_masses;
  std::optional<LlrMoments> lfd_moments;

  for (auto choice : det.variants) {
    switch (choice) {
      case VariantChoice::Plain:
        plans.push_back({choice, DetectorVariant::plain(), nominal, std::nullopt, std::nullopt});
        break;
      case VariantChoice::Lfd: {
        if (!lfd_params) {
          const double eps = det.lfd_epsilon.value_or(cfg.noise.epsilon());
          lfd_params = solve_lfd_eps(cfg.test, eps, det.lfd_solver);
          lfd_masses = excess_masses(*lfd_params, cfg.test, eps, det.mass_approximation);
          lfd_moments = clipped_llr_moments(*lfd_masses, *lfd_params);
        }
        plans.push_back(
            {choice, DetectorVariant::lfd(*lfd_params), *lfd_moments, lfd_params, lfd_masses});
        break;
      }
      case VariantChoice::Mean:
      case VariantChoice::Median:
      case VariantChoice::Huber:
      case VariantChoice::Myriad: {
        const EstimatorKind kind = choice == VariantChoice::Mean     ? EstimatorKind::Mean
                                   : choice == VariantChoice::Median ? EstimatorKind::Median
                                   : choice == VariantChoice::Huber  ? EstimatorKind::HuberM
                                                                     : EstimatorKind::Myriad;
        plans.push_back({choice,
                         DetectorVariant::estimator(kind, cfg.test, det.estimators,
                                                    det.allow_unsuitable_median),
                         nominal, std::nullopt, std::nullopt});
        break;
      }
    }
  }
  return plans;
}

SensorGraph experiment_topology(const ExperimentConfig& cfg) {
  if (cfg.network.fixed) {
    const auto& f = *cfg.network.fixed;
    return SensorGraph(f.nodes, f.edges, f.positions);
  }
  Rng rng(derive_seed(cfg.seed, kTopologyStream));
  return generate_geometric_graph(cfg.network.nodes, cfg.network.radius, rng,
                                  cfg.network.max_attempts);
}

SensorGraph run_topology(const ExperimentConfig& cfg, long run) {
  if (cfg.network.mode == TopologyMode::PerExperiment || cfg.network.fixed) {
    return experiment_topology(cfg);
  }
  Rng rng(derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(run)), kRunTopologyStream));
  return generate_geometric_graph(cfg.network.nodes, cfg.network.radius, rng,
                                  cfg.network.max_attempts);
}

double experiment_xi(const ExperimentConfig& cfg, const SensorGraph& graph) {
  return xi_bound(equal_weight_matrix(graph), cfg.detection.xi_method, cfg.detection.xi_power).value;
}

namespace {

struct Cell {
  long sum_t = 0;
  long sum_t2 = 0;
  long decided = 0;
  long wrong = 0;
  long truncated = 0;
  std::vector<long> node_decided;
  std::vector<long> node_wrong;

  void merge(const Cell& o) {
    sum_t += o.sum_t;
    sum_t2 += o.sum_t2;
    decided += o.decided;
    wrong += o.wrong;
    truncated += o.truncated;
    if (node_decided.size() < o.node_decided.size()) {
      node_decided.resize(o.node_decided.size(), 0);
      node_wrong.resize(o.node_wrong.size(), 0);
    }
    for (std::size_t k = 0; k < o.node_decided.size(); ++k) {
      node_decided[k] += o.node_decided[k];
      node_wrong[k] += o.node_wrong[k];
    }
  }
};

// Thresholds for each (variant, budget) given xi.
std::vector<std::vector<Thresholds>> threshold_table(const ExperimentConfig& cfg,
                                                     const std::vector<VariantPlan>& plans,
                                                     double xi) {
  std::vector<std::vector<Thresholds>> out;
  for (const auto& plan : plans) {
    auto& row = out.emplace_back();
    for (const auto& budget : cfg.detection.budgets) {
      row.push_back(compute_thresholds(cfg.detection.threshold_method, plan.moments, xi, budget,
                                       cfg.detection.numeric));
    }
  }
  return out;
}

// Calls `body(run)` for every run on `threads` workers; rethrows the first
// worker exception.
template <typename Body>
void parallel_runs(long runs, int threads, Body&& body) {
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&](int worker_id) {
    try {
      for (long r = next++; r < runs; r = next++) body(worker_id, r);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = runs;
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker, i);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

InnovationSource measurement_source(const GaussianBinaryTest& test, const TrueState& state,
                                    const ContaminationModel& noise, Rng& rng) {
  return [&test, state, &noise, &rng](long, Eigen::VectorXd& out) {
    for (Eigen::Index k = 0; k < out.size(); ++k) {
      out[k] = llr(test, sample_measurement(state, noise, rng));
    }
  };
}

}  // namespace

std::vector<Metrics> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto plans = plan_variants(cfg);
  const auto& budgets = cfg.detection.budgets;
  const std::size_t n_h = cfg.hypotheses.size();
  const std::size_t n_v = plans.size();
  const std::size_t n_b = budgets.size();
  const std::size_t n_cells = n_h * n_v * n_b;
  auto cell_index = [&](std::size_t h, std::size_t v, std::size_t b) {
    return (h * n_v + v) * n_b + b;
  };

  const bool per_run = cfg.network.mode == TopologyMode::PerRun && !cfg.network.fixed;
  std::optional<SensorGraph> shared_graph;
  std::optional<CombinationMatrix> shared_w;
  std::vector<std::vector<Thresholds>> shared_th;
  if (!per_run) {
    shared_graph = experiment_topology(cfg);
    shared_w = equal_weight_matrix(*shared_graph);
    shared_th = threshold_table(cfg, plans, experiment_xi(cfg, *shared_graph));
  }

  const int threads = static_cast<int>(std::min<long>(cfg.threads, cfg.runs));
  std::vector<std::vector<Cell>> partial(threads, std::vector<Cell>(n_cells));

  parallel_runs(cfg.runs, threads, [&](int worker, long run) {
    std::optional<SensorGraph> local_graph;
    std::optional<CombinationMatrix> local_w;
    std::vector<std::vector<Thresholds>> local_th;
    if (per_run) {
      local_graph = run_topology(cfg, run);
      local_w = equal_weight_matrix(*local_graph);
      local_th = threshold_table(cfg, plans, experiment_xi(cfg, *local_graph));
    }
    const SensorGraph& graph = per_run ? *local_graph : *shared_graph;
    const CombinationMatrix& w = per_run ? *local_w : *shared_w;
    const auto& table = per_run ? local_th : shared_th;

    for (std::size_t h = 0; h < n_h; ++h) {
      const Hypothesis hyp = cfg.hypotheses[h];
      const TrueState state = true_state(cfg.test, hyp);
      const std::uint64_t seed = run_seed(cfg.seed, run, hyp);
      for (std::size_t v = 0; v < n_v; ++v) {
        for (std::size_t b = 0; b < n_b; ++b) {
          Rng rng(seed);
          NetworkDetector detector(graph, w, table[v][b], plans[v].variant);
          const auto records = run_until_all_stop(
              detector, measurement_source(cfg.test, state, cfg.noise, rng), cfg.detection.t_max);
          Cell& cell = partial[worker][cell_index(h, v, b)];
          if (cell.node_decided.size() < records.size()) {
            cell.node_decided.resize(records.size(), 0);
            cell.node_wrong.resize(records.size(), 0);
          }
          for (std::size_t k = 0; k < records.size(); ++k) {
            const auto& rec = records[k];
            if (rec.truncated) {
              ++cell.truncated;
              continue;
            }
            ++cell.decided;
            ++cell.node_decided[k];
            cell.sum_t += rec.stopping_time;
            cell.sum_t2 += rec.stopping_time * rec.stopping_time;
            if (*rec.decision != hyp) {
              ++cell.wrong;
              ++cell.node_wrong[k];
            }
          }
        }
      }
    }
  });

  // Integer accumulators: the merge is exact in any order.
  std::vector<Cell> total(n_cells);
  for (const auto& p : partial) {
    for (std::size_t c = 0; c < n_cells; ++c) total[c].merge(p[c]);
  }

  std::vector<Metrics> rows;
  for (std::size_t v = 0; v < n_v; ++v) {
    for (std::size_t b = 0; b < n_b; ++b) {
      for (std::size_t h = 0; h < n_h; ++h) {
        const Cell& cell = total[cell_index(h, v, b)];
        Metrics m;
        m.scenario = cfg.scenario;
        m.variant = to_string(plans[v].choice);
        m.alpha = budgets[b].alpha;
        m.beta = budgets[b].beta;
        m.epsilon = cfg.noise.epsilon();
        m.kappa = cfg.noise.kappa();
        m.hypothesis = cfg.hypotheses[h];
        m.n_runs = cfg.runs;
        m.truncated = cell.truncated;
        m.seed = cfg.seed;
        m.decided = cell.decided;
        m.wrong = cell.wrong;
        if (cell.decided > 0) {
          const double n = static_cast<double>(cell.decided);
          m.arl = static_cast<double>(cell.sum_t) / n;
          m.err_emp = static_cast<double>(cell.wrong) / n;
          const double second = static_cast<double>(cell.sum_t2) / n;
          m.arl_se = std::sqrt(std::max(0.0, second - m.arl * m.arl) / n);
        } else {
          m.arl = std::nan("");
          m.err_emp = std::nan("");
        }
        for (std::size_t k = 0; k < cell.node_decided.size(); ++k) {
          m.per_node_err.push_back(cell.node_decided[k] > 0
                                       ? static_cast<double>(cell.node_wrong[k]) /
                                             static_cast<double>(cell.node_decided[k])
                                       : std::nan(""));
        }
        rows.push_back(std::move(m));
      }
    }
  }
  return rows;
}

std::vector<SnapshotSet> collect_statistic_snapshots(const ExperimentConfig& cfg,
                                                     const std::vector<long>& times) {
  if (times.empty()) return {};
  validate(cfg);
  for (long t : times) {
    if (t < 1) throw ConfigError("snapshot times must be >= 1");
  }
  const long horizon = *std::max_element(times.begin(), times.end());
  const auto plans = plan_variants(cfg);

  std::vector<SnapshotSet> out;
  for (auto hyp : cfg.hypotheses) {
    for (const auto& plan : plans) {
      const std::size_t first = out.size();
      for (long t : times) out.push_back({to_string(plan.choice), hyp, t, {}});
      const TrueState state = true_state(cfg.test, hyp);
      for (long run = 0; run < cfg.runs; ++run) {
        const SensorGraph graph = run_topology(cfg, run);
        const CombinationMatrix w = equal_weight_matrix(graph);
        const Thresholds th =
            compute_thresholds(cfg.detection.threshold_method, plan.moments,
                               experiment_xi(cfg, graph), cfg.detection.budgets.front(),
                               cfg.detection.numeric);
        Rng rng(run_seed(cfg.seed, run, hyp));
        NetworkDetector detector(graph, w, th, plan.variant);
        const auto source = measurement_source(cfg.test, state, cfg.noise, rng);
        Eigen::VectorXd eta(graph.size());
        for (long t = 1; t <= horizon; ++t) {
          source(t, eta);
          detector.step(eta);
          for (std::size_t i = 0; i < times.size(); ++i) {
            if (times[i] != t) continue;
            auto& samples = out[first + i].samples;
            samples.insert(samples.end(), detector.statistics().begin(),
                           detector.statistics().end());
          }
        }
      }
    }
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_metrics_csv(std::ostream& out, const std::vector<Metrics>& rows) {
  out << "scenario,variant,alpha,beta,epsilon,kappa,hypothesis,n_runs,arl,err_emp,truncated,seed\n";
  for (const auto& m : rows) {
    out << m.scenario << ',' << m.variant << ',' << format_double(m.alpha) << ','
        << format_double(m.beta) << ',' << format_double(m.epsilon) << ','
        << format_double(m.kappa) << ',' << hypothesis_label(m.hypothesis) << ',' << m.n_runs
        << ',' << format_double(m.arl) << ',' << format_double(m.err_emp) << ',' << m.truncated
        << ',' << m.seed << '\n';
  }
}

}  // namespace rcisprt
