#include "rcisprt/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rcisprt/config.hpp"
#include "rcisprt/errors.hpp"
#include "rcisprt/montecarlo.hpp"

namespace rcisprt {

using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("-c,--config", c.config, "experiment config (JSON)")->required();
  if (with_out) app->add_option("-o,--out", c.out, "output file (default: stdout)");
  app->add_option("-s,--seed", c.seed, "override execution.seed");
  app->add_option("-j,--threads", c.threads, "override execution.threads");
  app->add_flag("-v,--verbose", c.verbose, "progress and diagnostics on stderr");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) {
    if (*c.threads < 1) throw ConfigError("--threads: must be >= 1");
    cfg.threads = *c.threads;
  }
  return cfg;
}

// Writes to --out when given, else to the default stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

json moments_json(const LlrMoments& m) {
  return {{"mean0", m.mean0}, {"var0", m.var0}, {"mean1", m.mean1}, {"var1", m.var1}};
}

json thresholds_json(const Thresholds& t) { return {{"lower", t.lower}, {"upper", t.upper}}; }

json lfd_json(const ClippedLrtParams& p, const ExcessMass& m, const LlrMoments& clipped) {
  json masses = json::object();
  for (auto h : {Hypothesis::H0, Hypothesis::H1}) {
    const int i = index_of(h);
    masses[hypothesis_label(h)] = {{"at_lower", m.at_lower[i]},
                                   {"at_upper", m.at_upper[i]},
                                   {"interior_density", m.interior_density[i]}};
  }
  return {{"epsilon", p.epsilon},    {"c0", p.c0},
          {"c1", p.c1},              {"clip_lower", p.lower},
          {"clip_upper", p.upper},   {"iterations", p.iterations},
          {"excess_masses", masses}, {"clipped_moments", moments_json(clipped)}};
}

void log_setup(std::ostream& err, const ExperimentConfig& cfg) {
  err << "scenario " << cfg.scenario << ", " << cfg.runs << " runs, seed " << cfg.seed << ", "
      << cfg.threads << " thread(s)\n";
  if (cfg.network.mode == TopologyMode::PerExperiment || cfg.network.fixed) {
    const SensorGraph g = experiment_topology(cfg);
    err << "topology: " << g.size() << " nodes, " << g.edges().size() << " edges, xi = "
        << experiment_xi(cfg, g) << '\n';
  }
}

int cmd_experiment(const Common& c, bool sweep, const std::vector<double>& grid, std::ostream& out,
                   std::ostream& err) {
  ExperimentConfig cfg = load(c);
  if (sweep) {
    cfg.detection.budgets.clear();
    for (double a : grid) {
      if (!(a > 0.0 && a < 1.0)) throw ConfigError("--alphas: budgets must lie in (0, 1)");
      cfg.detection.budgets.emplace_back(a, a);
    }
  }
  if (c.verbose) log_setup(err, cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = run_experiment(cfg);
  long truncated = 0;
  for (const auto& r : rows) truncated += r.truncated;
  if (truncated > 0) {
    err << "warning: " << truncated
        << " (node, run) pairs hit t_max undecided; excluded from arl and err_emp\n";
  }
  if (c.verbose) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    err << rows.size() << " rows in " << dt.count() << " s\n";
  }
  Sink sink(c.out, out);
  write_metrics_csv(sink.get(), rows);
  return kExitOk;
}

int cmd_thresholds(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  const auto plans = plan_variants(cfg);
  const SensorGraph graph = experiment_topology(cfg);
  const XiBound xi =
      xi_bound(equal_weight_matrix(graph), cfg.detection.xi_method, cfg.detection.xi_power);

  json doc;
  doc["scenario"] = cfg.scenario;
  doc["xi"] = {{"value", xi.value}, {"method", to_string(xi.method)}, {"power", xi.power}};
  doc["nodes"] = graph.size();
  json variants = json::array();
  for (const auto& plan : plans) {
    json v;
    v["variant"] = to_string(plan.choice);
    v["moments"] = moments_json(plan.moments);
    json budgets = json::array();
    for (const auto& b : cfg.detection.budgets) {
      json row{{"alpha", b.alpha}, {"beta", b.beta}};
      try {
        row["closed_form"] = thresholds_json(closed_form_thresholds(plan.moments, xi.value, b));
      } catch (const NumericalError& e) {
        row["closed_form"] = {{"error", e.what()}};
      }
      try {
        row["numeric"] =
            thresholds_json(numeric_thresholds(plan.moments, xi.value, b, cfg.detection.numeric));
      } catch (const NumericalError& e) {
        row["numeric"] = {{"error", e.what()}};
      }
      budgets.push_back(row);
    }
    v["budgets"] = budgets;
    variants.push_back(v);
  }
  doc["variants"] = variants;
  Sink sink(c.out, out);
  sink.get() << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_lfd(const Common& c, const std::string& curves, int points, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  if (points < 2) throw ConfigError("--points: must be >= 2");
  const double eps = cfg.detection.lfd_epsilon.value_or(cfg.noise.epsilon());
  if (!(eps >= 0.0 && eps < 0.5)) throw ConfigError("LFD design epsilon must lie in [0, 0.5)");
  const ClippedLrtParams p = solve_lfd_eps(cfg.test, eps, cfg.detection.lfd_solver);

  json doc;
  doc["scenario"] = cfg.scenario;
  doc["nominal_moments"] = moments_json(llr_moments(cfg.test));
  if (p.unclipped()) {
    doc["lfd"] = {{"epsilon", 0.0}, {"unclipped", true}};
  } else {
    json by_mode = json::object();
    for (auto mode :
         {MassApproximation::AsPrinted, MassApproximation::StdDev, MassApproximation::Exact}) {
      const ExcessMass m = excess_masses(p, cfg.test, eps, mode);
      by_mode[to_string(mode)] = lfd_json(p, m, clipped_llr_moments(m, p));
    }
    doc["lfd"] = by_mode;
  }
  Sink sink(c.out, out);
  sink.get() << doc.dump(2) << '\n';

  if (!curves.empty()) {
    std::ofstream f(curves);
    if (!f) throw std::runtime_error("cannot open curves file '" + curves + "'");
    const auto support = lfd_support(cfg.test);
    f << "y,p0,p1,q0,q1,llr,clipped_llr\n";
    for (int i = 0; i < points; ++i) {
      const double y = support[0] + (support[1] - support[0]) * i / (points - 1);
      const double p0 = std::exp(normal_log_pdf(y, cfg.test.mu0(), cfg.test.var0()));
      const double p1 = std::exp(normal_log_pdf(y, cfg.test.mu1(), cfg.test.var1()));
      f << format_double(y) << ',' << format_double(p0) << ',' << format_double(p1) << ','
        << format_double(std::exp(lfd_log_density(p, cfg.test, Hypothesis::H0, y))) << ','
        << format_double(std::exp(lfd_log_density(p, cfg.test, Hypothesis::H1, y))) << ','
        << format_double(llr(cfg.test, y)) << ',' << format_double(clipped_llr(p, cfg.test, y))
        << '\n';
    }
  }
  return kExitOk;
}

int cmd_snapshot(const Common& c, const std::vector<long>& times, std::ostream& out) {
  const ExperimentConfig cfg = load(c);
  const auto sets = collect_statistic_snapshots(cfg, times);
  Sink sink(c.out, out);
  auto& s = sink.get();
  s << "variant,hypothesis,time,run,node,statistic\n";
  for (const auto& set : sets) {
    const std::size_t n = set.samples.size() / static_cast<std::size_t>(cfg.runs);
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
      s << set.variant << ',' << hypothesis_label(set.hypothesis) << ',' << set.time << ','
        << i / n << ',' << i % n << ',' << format_double(set.samples[i]) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust consensus+innovations sequential detection over sensor networks"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, th_opts, lfd_opts, snap_opts;
  auto* run = app.add_subcommand("run", "run one Monte Carlo experiment, metrics as CSV");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "run the experiment over an alpha = beta grid");
  add_common(sweep, sweep_opts);
  std::vector<double> grid{1e-3, 1e-2, 1e-1};
  sweep->add_option("--alphas", grid, "alpha = beta values")->delimiter(',');

  auto* th = app.add_subcommand("thresholds", "closed-form and numeric thresholds as JSON");
  add_common(th, th_opts);

  auto* lfd = app.add_subcommand("lfd", "clipping constants as JSON, optional LFD curves CSV");
  add_common(lfd, lfd_opts);
  std::string curves;
  int points = 401;
  lfd->add_option("--curves", curves, "write y, p0, p1, q0, q1, llr, clipped_llr to this CSV");
  lfd->add_option("--points", points, "grid points for --curves");

  auto* snap = app.add_subcommand("snapshot", "raw samples of S_k(t) at the given times");
  add_common(snap, snap_opts);
  std::vector<long> times{1, 10, 50};
  snap->add_option("--times", times, "time indices")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (app.get_subcommands().empty()) err << app.help();
    return kExitConfig;
  }

  try {
    if (*run) return cmd_experiment(run_opts, false, grid, out, err);
    if (*sweep) return cmd_experiment(sweep_opts, true, grid, out, err);
    if (*th) return cmd_thresholds(th_opts, out);
    if (*lfd) return cmd_lfd(lfd_opts, curves, points, out);
    if (*snap) return cmd_snapshot(snap_opts, times, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace rcisprt
