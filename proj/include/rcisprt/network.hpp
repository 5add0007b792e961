#ifndef RCISPRT_NETWORK_HPP
#define RCISPRT_NETWORK_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rcisprt/numerics.hpp"

namespace rcisprt {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

using Edge = std::pair<int, int>;

/// Simple, undirected, connected graph of sensors. The constructor rejects
/// self-loops, duplicate edges and disconnected layouts.
class SensorGraph {
 public:
  SensorGraph(int nodes, std::vector<Edge> edges, std::vector<Position> positions = {});

  int size() const { return nodes_; }
  /// Edges as (i, j) with i < j, sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Position>& positions() const { return positions_; }
  bool has_positions() const { return !positions_.empty(); }

  /// Open neighborhood of node k in ascending order.
  const std::vector<int>& neighbors(int k) const { return adjacency_[k]; }
  /// Closed neighborhood of node k (neighbors plus k) in ascending order.
  std::vector<int> closed_neighborhood(int k) const;
  int degree(int k) const { return static_cast<int>(adjacency_[k].size()); }
  bool has_edge(int i, int j) const;

 private:
  int nodes_;
  std::vector<Edge> edges_;
  std::vector<Position> positions_;
  std::vector<std::vector<int>> adjacency_;
};

/// True when the undirected edge set connects all `nodes` vertices.
bool is_connected(int nodes, const std::vector<Edge>& edges);

/// Unit-disk graph over the given positions: an edge joins every pair at
/// Euclidean distance <= radius. Throws if the result is disconnected.
SensorGraph graph_from_positions(std::vector<Position> positions, double radius);

/// Random geometric graph with i.i.d. uniform positions on the unit square.
/// The whole layout is redrawn until it is connected; throws NumericalError
/// once `max_attempts` layouts have failed.
SensorGraph generate_geometric_graph(int nodes, double radius, Rng& rng,
                                     int max_attempts = 10000);

/// Right-stochastic combination weights. Entries are non-negative, every row
/// sums to one, and w_kl > 0 only inside the closed neighborhood of k.
class CombinationMatrix {
 public:
  /// Validates `weights` against `graph`.
  CombinationMatrix(const SensorGraph& graph, Eigen::MatrixXd weights);

  const Eigen::MatrixXd& weights() const { return weights_; }
  int size() const { return static_cast<int>(weights_.rows()); }
  double operator()(int k, int l) const { return weights_(k, l); }

 private:
  Eigen::MatrixXd weights_;
};

/// w_kl = 1 / |N_k ∪ {k}| on the closed neighborhood, zero elsewhere.
CombinationMatrix equal_weight_matrix(const SensorGraph& graph);

enum class XiMethod { MaxNorm, Eigen };

struct XiBound {
  double value = 0.0;
  XiMethod method = XiMethod::MaxNorm;
  int power = 1;
};

/// Scalar bound on the diagonal of W^m (W^m)^T, either its max-norm or its
/// largest eigenvalue divided by N.
XiBound xi_bound(const CombinationMatrix& w, XiMethod method = XiMethod::MaxNorm,
                 int power = 1);

const char* to_string(XiMethod method);
std::optional<XiMethod> parse_xi_method(const std::string& name);

/// Provenance record: node count, positions, edge list and row-major weights.
nlohmann::json to_json(const SensorGraph& graph, const CombinationMatrix& w);

}  // namespace rcisprt

#endif  // RCISPRT_NETWORK_HPP
