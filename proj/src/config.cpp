#include "rcisprt/config.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rcisprt/errors.hpp"

namespace rcisprt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

// A JSON object together with its path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  void require_object() const {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  void allow_keys(std::initializer_list<const char*> keys) const {
    require_object();
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) fail(child_path(it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  Node child(const char* key) const { return Node(j_.at(key), child_path(key)); }

  Node element(std::size_t i) const {
    return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  double number() const {
    if (!j_.is_number()) fail(path_, "expected a number");
    return j_.get<double>();
  }

  long integer() const {
    if (!j_.is_number_integer()) fail(path_, "expected an integer");
    return j_.get<long>();
  }

  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_integer() || (j_.is_number_integer() && !j_.is_number_unsigned() &&
                                    j_.get<long long>() < 0)) {
      fail(path_, "expected a non-negative integer");
    }
    return j_.get<std::uint64_t>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail(path_, "expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail(path_, "expected a string");
    return j_.get<std::string>();
  }

  std::size_t array_size() const {
    if (!j_.is_array()) fail(path_, "expected an array");
    return j_.size();
  }

  double number_or(const char* key, double fallback) const {
    return has(key) ? child(key).number() : fallback;
  }
  long integer_or(const char* key, long fallback) const {
    return has(key) ? child(key).integer() : fallback;
  }
  bool boolean_or(const char* key, bool fallback) const {
    return has(key) ? child(key).boolean() : fallback;
  }
  std::string string_or(const char* key, std::string fallback) const {
    return has(key) ? child(key).string() : fallback;
  }

 private:
  std::string child_path(const std::string& key) const { return path_ + "." + key; }

  const json& j_;
  std::string path_;
};

double positive(const Node& n) {
  const double v = n.number();
  if (!(v > 0.0)) fail(n.path(), "must be > 0");
  return v;
}

double probability(const Node& n) {
  const double v = n.number();
  if (!(v > 0.0 && v < 1.0)) fail(n.path(), "must lie in (0, 1)");
  return v;
}

void parse_scenario(const Node& n, ExperimentConfig& cfg) {
  n.allow_keys({"name", "type", "mu0", "mu1", "sigma2", "noise_var", "signal_var", "var0", "var1",
                "true_hypothesis"});
  const std::string type = n.string_or("type", "shift_in_mean");
  cfg.scenario = n.string_or("name", type);
  try {
    if (type == "shift_in_mean") {
      const double mu0 = n.number_or("mu0", -1.0);
      const double mu1 = n.number_or("mu1", 1.0);
      const double s2 = n.has("sigma2") ? positive(n.child("sigma2")) : 2.0;
      if (mu0 == mu1) fail(n.path() + ".mu1", "must differ from mu0");
      cfg.test = GaussianBinaryTest::shift_in_mean(mu0, mu1, s2);
    } else if (type == "shift_in_variance") {
      const double noise = n.has("noise_var") ? positive(n.child("noise_var")) : 1.0;
      const double signal = n.has("signal_var") ? positive(n.child("signal_var")) : 4.0;
      cfg.test = GaussianBinaryTest::shift_in_variance(noise, signal);
    } else if (type == "general") {
      for (const char* k : {"mu0", "mu1", "var0", "var1"}) {
        if (!n.has(k)) fail(n.path() + "." + k, "required for type \"general\"");
      }
      cfg.test = GaussianBinaryTest(n.child("mu0").number(), positive(n.child("var0")),
                                    n.child("mu1").number(), positive(n.child("var1")));
    } else {
      fail(n.path() + ".type", "expected \"shift_in_mean\", \"shift_in_variance\" or \"general\"");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail(n.path(), e.what());
  }

  const std::string truth = n.string_or("true_hypothesis", "both");
  if (truth == "h0") {
    cfg.hypotheses = {Hypothesis::H0};
  } else if (truth == "h1") {
    cfg.hypotheses = {Hypothesis::H1};
  } else if (truth == "both") {
    cfg.hypotheses = {Hypothesis::H0, Hypothesis::H1};
  } else {
    fail(n.path() + ".true_hypothesis", "expected \"h0\", \"h1\" or \"both\"");
  }
}

void parse_noise(const Node& n, ExperimentConfig& cfg) {
  n.allow_keys({"epsilon", "kappa", "contaminant"});
  const double eps = n.number_or("epsilon", 0.0);
  if (!(eps >= 0.0 && eps < 1.0)) fail(n.path() + ".epsilon", "must lie in [0, 1)");
  if (n.has("contaminant")) {
    if (n.has("kappa")) fail(n.path() + ".kappa", "give either kappa or contaminant, not both");
    const Node c = n.child("contaminant");
    c.allow_keys({"mean", "var"});
    GaussianParams p;
    p.mean = c.number_or("mean", 0.0);
    p.variance = c.has("var") ? positive(c.child("var")) : 1.0;
    cfg.noise = ContaminationModel(eps, p);
  } else {
    const double kappa = n.has("kappa") ? positive(n.child("kappa")) : 10.0;
    cfg.noise = ContaminationModel(eps, kappa);
  }
}

FixedTopology parse_fixed(const Node& n) {
  n.allow_keys({"nodes", "edges", "positions"});
  FixedTopology f;
  if (!n.has("nodes")) fail(n.path() + ".nodes", "required");
  f.nodes = static_cast<int>(n.child("nodes").integer());
  if (f.nodes < 1) fail(n.path() + ".nodes", "must be >= 1");
  if (n.has("edges")) {
    const Node edges = n.child("edges");
    for (std::size_t i = 0; i < edges.array_size(); ++i) {
      const Node e = edges.element(i);
      if (e.array_size() != 2) fail(e.path(), "an edge is a pair [i, j]");
      const long a = e.element(0).integer();
      const long b = e.element(1).integer();
      if (a < 0 || b < 0 || a >= f.nodes || b >= f.nodes) fail(e.path(), "node index out of range");
      f.edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }
  if (n.has("positions")) {
    const Node pos = n.child("positions");
    if (pos.array_size() != static_cast<std::size_t>(f.nodes)) {
      fail(pos.path(), "need one [x, y] per node");
    }
    for (std::size_t i = 0; i < pos.array_size(); ++i) {
      const Node p = pos.element(i);
      if (p.array_size() != 2) fail(p.path(), "a position is [x, y]");
      f.positions.push_back({p.element(0).number(), p.element(1).number()});
    }
  }
  try {
    SensorGraph(f.nodes, f.edges, f.positions);
  } catch (const std::exception& e) {
    fail(n.path(), e.what());
  }
  return f;
}

void parse_network(const Node& n, ExperimentConfig& cfg) {
  n.allow_keys({"nodes", "radius", "topology", "max_attempts", "fixed"});
  auto& net = cfg.network;
  net.nodes = static_cast<int>(n.integer_or("nodes", net.nodes));
  net.radius = n.number_or("radius", net.radius);
  net.max_attempts = static_cast<int>(n.integer_or("max_attempts", net.max_attempts));
  if (net.max_attempts < 1) fail(n.path() + ".max_attempts", "must be >= 1");
  const std::string mode = n.string_or("topology", "per_experiment");
  if (mode == "per_experiment") {
    net.mode = TopologyMode::PerExperiment;
  } else if (mode == "per_run") {
    net.mode = TopologyMode::PerRun;
  } else {
    fail(n.path() + ".topology", "expected \"per_experiment\" or \"per_run\"");
  }
  if (n.has("fixed")) {
    if (n.has("nodes") || n.has("radius")) {
      fail(n.path() + ".fixed", "a fixed topology excludes nodes and radius");
    }
    net.fixed = parse_fixed(n.child("fixed"));
    net.nodes = net.fixed->nodes;
  }
}

std::vector<ErrorBudget> parse_budgets(const Node& n) {
  std::vector<ErrorBudget> out;
  for (std::size_t i = 0; i < n.array_size(); ++i) {
    const Node b = n.element(i);
    if (b.raw().is_number()) {
      const double a = probability(b);
      out.emplace_back(a, a);
      continue;
    }
    b.allow_keys({"alpha", "beta"});
    if (!b.has("alpha")) fail(b.path() + ".alpha", "required");
    const double a = probability(b.child("alpha"));
    const double be = b.has("beta") ? probability(b.child("beta")) : a;
    out.emplace_back(a, be);
  }
  if (out.empty()) fail(n.path(), "need at least one budget");
  return out;
}

void parse_estimators(const Node& n, EstimatorOptions& opt) {
  n.allow_keys({"huber_c", "huber_tol", "huber_max_iter", "myriad_linearity", "myriad_m",
                "myriad_grid_points", "myriad_tol"});
  if (n.has("huber_c")) opt.huber.c = positive(n.child("huber_c"));
  if (n.has("huber_tol")) opt.huber.tol = positive(n.child("huber_tol"));
  opt.huber.max_iter = static_cast<int>(n.integer_or("huber_max_iter", opt.huber.max_iter));
  if (opt.huber.max_iter < 1) fail(n.path() + ".huber_max_iter", "must be >= 1");
  const std::string lin = n.string_or("myriad_linearity", "mad");
  if (lin == "mad") {
    opt.myriad.policy = MyriadConfig::Linearity::Mad;
  } else if (lin == "fixed") {
    opt.myriad.policy = MyriadConfig::Linearity::Fixed;
  } else {
    fail(n.path() + ".myriad_linearity", "expected \"mad\" or \"fixed\"");
  }
  if (n.has("myriad_m")) opt.myriad.m = positive(n.child("myriad_m"));
  opt.myriad.grid_points =
      static_cast<int>(n.integer_or("myriad_grid_points", opt.myriad.grid_points));
  if (opt.myriad.grid_points < 2) fail(n.path() + ".myriad_grid_points", "must be >= 2");
  if (n.has("myriad_tol")) opt.myriad.tol = positive(n.child("myriad_tol"));
}

void parse_detection(const Node& n, ExperimentConfig& cfg) {
  n.allow_keys({"variants", "budgets", "thresholds", "xi", "lfd", "estimators",
                "allow_unsuitable_median", "t_max"});
  auto& det = cfg.detection;

  det.variants = default_variants(cfg.test);
  if (n.has("variants")) {
    const Node v = n.child("variants");
    if (v.raw().is_string()) {
      if (v.string() != "default") fail(v.path(), "expected a list of variants or \"default\"");
    } else {
      det.variants.clear();
      for (std::size_t i = 0; i < v.array_size(); ++i) {
        const Node e = v.element(i);
        const auto choice = parse_variant(e.string());
        if (!choice) {
          fail(e.path(), "unknown variant \"" + e.string() +
                             "\" (expected plain, lfd, mean, median, huber or myriad)");
        }
        det.variants.push_back(*choice);
      }
      if (det.variants.empty()) fail(v.path(), "need at least one variant");
    }
  }

  det.budgets = n.has("budgets") ? parse_budgets(n.child("budgets")) : default_budget_grid();

  if (n.has("thresholds")) {
    const Node t = n.child("thresholds");
    t.allow_keys({"method", "tol", "t_max", "closed_form_fallback"});
    const std::string method = t.string_or("method", "closed_form");
    const auto m = parse_threshold_method(method);
    if (!m) fail(t.path() + ".method", "expected \"closed_form\" or \"numeric\"");
    det.threshold_method = *m;
    if (t.has("tol")) det.numeric.tol = positive(t.child("tol"));
    det.numeric.t_max = t.integer_or("t_max", det.numeric.t_max);
    if (det.numeric.t_max < 1) fail(t.path() + ".t_max", "must be >= 1");
    det.numeric.closed_form_fallback =
        t.boolean_or("closed_form_fallback", det.numeric.closed_form_fallback);
  }

  if (n.has("xi")) {
    const Node x = n.child("xi");
    x.allow_keys({"method", "power"});
    const auto m = parse_xi_method(x.string_or("method", "max_norm"));
    if (!m) fail(x.path() + ".method", "expected \"max_norm\" or \"eigen\"");
    det.xi_method = *m;
    det.xi_power = static_cast<int>(x.integer_or("power", det.xi_power));
    if (det.xi_power < 1) fail(x.path() + ".power", "must be >= 1");
  }

  if (n.has("lfd")) {
    const Node l = n.child("lfd");
    l.allow_keys({"epsilon", "mass_approximation", "tol", "max_iter"});
    if (l.has("epsilon")) {
      const double e = l.child("epsilon").number();
      if (!(e >= 0.0 && e < 0.5)) fail(l.path() + ".epsilon", "must lie in [0, 0.5)");
      det.lfd_epsilon = e;
    }
    const auto mode = parse_mass_approximation(l.string_or("mass_approximation", "as_printed"));
    if (!mode) {
      fail(l.path() + ".mass_approximation", "expected \"as_printed\", \"stddev\" or \"exact\"");
    }
    det.mass_approximation = *mode;
    if (l.has("tol")) det.lfd_solver.tol = positive(l.child("tol"));
    det.lfd_solver.max_iter = static_cast<int>(l.integer_or("max_iter", det.lfd_solver.max_iter));
    if (det.lfd_solver.max_iter < 1) fail(l.path() + ".max_iter", "must be >= 1");
  }

  if (n.has("estimators")) parse_estimators(n.child("estimators"), det.estimators);
  det.allow_unsuitable_median = n.boolean_or("allow_unsuitable_median", false);
  det.t_max = n.integer_or("t_max", det.t_max);
  if (det.t_max < 1) fail(n.path() + ".t_max", "must be >= 1");

  if (!det.allow_unsuitable_median && !median_is_suitable(cfg.test)) {
    for (std::size_t i = 0; i < det.variants.size(); ++i) {
      if (det.variants[i] == VariantChoice::Median) {
        fail(n.path() + ".variants[" + std::to_string(i) + "]",
             "median is not applicable when the hypotheses differ in variance: the LLR is "
             "skewed and the median estimates the mean of symmetric distributions only");
      }
    }
  }
}

void parse_execution(const Node& n, ExperimentConfig& cfg) {
  n.allow_keys({"runs", "seed", "threads"});
  cfg.runs = n.integer_or("runs", cfg.runs);
  if (cfg.runs < 1) fail(n.path() + ".runs", "need at least one Monte Carlo run");
  if (n.has("seed")) cfg.seed = n.child("seed").unsigned_integer();
  cfg.threads = static_cast<int>(n.integer_or("threads", cfg.threads));
  if (cfg.threads < 1) fail(n.path() + ".threads", "must be >= 1");
}

}  // namespace

std::vector<ErrorBudget> default_budget_grid() {
  return {ErrorBudget(1e-3, 1e-3), ErrorBudget(1e-2, 1e-2), ErrorBudget(1e-1, 1e-1)};
}

ExperimentConfig parse_config(const json& doc) {
  const Node root(doc, "$");
  root.allow_keys({"scenario", "noise", "network", "detection", "execution"});
  ExperimentConfig cfg;
  if (root.has("scenario")) parse_scenario(root.child("scenario"), cfg);
  if (root.has("noise")) parse_noise(root.child("noise"), cfg);
  if (root.has("network")) parse_network(root.child("network"), cfg);
  if (root.has("detection")) {
    parse_detection(root.child("detection"), cfg);
  } else {
    parse_detection(Node(json::object(), "$.detection"), cfg);
  }
  if (root.has("execution")) parse_execution(root.child("execution"), cfg);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace rcisprt
