#include "rcisprt/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rcisprt/errors.hpp"

namespace rcisprt {

namespace {

constexpr double kRowSumTol = 1e-12;

}  // namespace

bool is_connected(int nodes, const std::vector<Edge>& edges) {
  if (nodes <= 0) return false;
  std::vector<int> parent(nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  int components = nodes;
  for (const auto& [a, b] : edges) {
    const int ra = find(a);
    const int rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

SensorGraph::SensorGraph(int nodes, std::vector<Edge> edges, std::vector<Position> positions)
    : nodes_(nodes), positions_(std::move(positions)) {
  if (nodes < 1) throw std::invalid_argument("SensorGraph: need at least one node");
  if (!positions_.empty() && static_cast<int>(positions_.size()) != nodes) {
    throw std::invalid_argument("SensorGraph: position count does not match node count");
  }
  for (auto& e : edges) {
    if (e.first < 0 || e.second < 0 || e.first >= nodes || e.second >= nodes) {
      throw std::invalid_argument("SensorGraph: edge endpoint out of range");
    }
    if (e.first == e.second) throw std::invalid_argument("SensorGraph: self-loop");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("SensorGraph: duplicate edge");
  }
  if (!is_connected(nodes, edges)) throw std::invalid_argument("SensorGraph: graph is disconnected");
  edges_ = std::move(edges);

  adjacency_.assign(nodes, {});
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& row : adjacency_) std::sort(row.begin(), row.end());
}

std::vector<int> SensorGraph::closed_neighborhood(int k) const {
  std::vector<int> out = adjacency_[k];
  out.insert(std::upper_bound(out.begin(), out.end(), k), k);
  return out;
}

bool SensorGraph::has_edge(int i, int j) const {
  const auto& row = adjacency_[i];
  return std::binary_search(row.begin(), row.end(), j);
}

namespace {

std::vector<Edge> unit_disk_edges(const std::vector<Position>& pos, double radius) {
  std::vector<Edge> edges;
  const int n = static_cast<int>(pos.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y) <= radius) edges.emplace_back(i, j);
    }
  }
  return edges;
}

}  // namespace

SensorGraph graph_from_positions(std::vector<Position> positions, double radius) {
  const int n = static_cast<int>(positions.size());
  auto edges = unit_disk_edges(positions, radius);
  return SensorGraph(n, std::move(edges), std::move(positions));
}

SensorGraph generate_geometric_graph(int nodes, double radius, Rng& rng, int max_attempts) {
  if (nodes < 2) throw std::invalid_argument("generate_geometric_graph: need n >= 2");
  if (!(radius > 0.0) || radius > std::sqrt(2.0)) {
    throw std::invalid_argument("generate_geometric_graph: radius must lie in (0, sqrt(2)]");
  }
  std::vector<Position> pos(nodes);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (auto& p : pos) {
      p.x = uniform01(rng);
      p.y = uniform01(rng);
    }
    auto edges = unit_disk_edges(pos, radius);
    if (is_connected(nodes, edges)) return SensorGraph(nodes, std::move(edges), pos);
  }
  throw NumericalError("generate_geometric_graph: no connected layout after " +
                       std::to_string(max_attempts) + " attempts; radius too small for " +
                       std::to_string(nodes) + " nodes");
}

CombinationMatrix::CombinationMatrix(const SensorGraph& graph, Eigen::MatrixXd weights)
    : weights_(std::move(weights)) {
  const int n = graph.size();
  if (weights_.rows() != n || weights_.cols() != n) {
    throw std::invalid_argument("CombinationMatrix: dimension does not match graph");
  }
  for (int k = 0; k < n; ++k) {
    double sum = 0.0;
    for (int l = 0; l < n; ++l) {
      const double w = weights_(k, l);
      if (!(w >= 0.0)) throw std::invalid_argument("CombinationMatrix: negative or NaN weight");
      if (w > 0.0 && l != k && !graph.has_edge(k, l)) {
        throw std::invalid_argument("CombinationMatrix: weight outside closed neighborhood");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw std::invalid_argument("CombinationMatrix: row " + std::to_string(k) +
                                  " does not sum to one");
    }
  }
}

CombinationMatrix equal_weight_matrix(const SensorGraph& graph) {
  const int n = graph.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const auto hood = graph.closed_neighborhood(k);
    const double share = 1.0 / static_cast<double>(hood.size());
    for (int l : hood) w(k, l) = share;
  }
  return CombinationMatrix(graph, std::move(w));
}

XiBound xi_bound(const CombinationMatrix& w, XiMethod method, int power) {
  if (power < 1) throw std::invalid_argument("xi_bound: power must be >= 1");
  Eigen::MatrixXd p = w.weights();
  for (int i = 1; i < power; ++i) p = p * w.weights();
  const Eigen::MatrixXd gram = p * p.transpose();

  XiBound out;
  out.method = method;
  out.power = power;
  if (method == XiMethod::MaxNorm) {
    out.value = gram.cwiseAbs().maxCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    out.value = solver.eigenvalues().maxCoeff() / static_cast<double>(gram.rows());
  }
  return out;
}

const char* to_string(XiMethod method) {
  return method == XiMethod::MaxNorm ? "max_norm" : "eigen";
}

std::optional<XiMethod> parse_xi_method(const std::string& name) {
  if (name == "max_norm") return XiMethod::MaxNorm;
  if (name == "eigen") return XiMethod::Eigen;
  return std::nullopt;
}

nlohmann::json to_json(const SensorGraph& graph, const CombinationMatrix& w) {
  nlohmann::json out;
  out["nodes"] = graph.size();
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : graph.edges()) edges.push_back({a, b});
  out["edges"] = std::move(edges);
  if (graph.has_positions()) {
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& p : graph.positions()) pos.push_back({p.x, p.y});
    out["positions"] = std::move(pos);
  }
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(w.size()) * w.size());
  for (int k = 0; k < w.size(); ++k) {
    for (int l = 0; l < w.size(); ++l) weights.push_back(w(k, l));
  }
  out["weights"] = std::move(weights);
  return out;
}

}  // namespace rcisprt
