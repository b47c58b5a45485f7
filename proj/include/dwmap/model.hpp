#pragma once

#include <cstddef>
#include <vector>

namespace dwmap {

using NodeId = int;
using EdgeId = int;

struct Edge {
  NodeId s = -1;
  NodeId t = -1;
};

// Discrete pairwise MRF. Potentials are log-space additive scores; nothing
// here ever exponentiates. Immutable after construction and safe to share
// across threads.
class Graph {
 public:
  Graph() = default;

  // pairwise_potentials[e] is row-major |X_s| x |X_t| (row = state of s).
  // Throws std::invalid_argument on malformed input: bad endpoints,
  // self-loops, duplicate unordered pairs, size mismatches, non-finite
  // entries.
  Graph(std::vector<int> cardinalities, std::vector<Edge> edges,
        std::vector<std::vector<double>> local_potentials,
        std::vector<std::vector<double>> pairwise_potentials);

  int num_nodes() const { return static_cast<int>(cards_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int cardinality(NodeId s) const { return cards_[static_cast<std::size_t>(s)]; }
  const std::vector<int>& cardinalities() const { return cards_; }

  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<Edge>& edges() const { return edges_; }

  const std::vector<double>& local_potential(NodeId s) const {
    return local_[static_cast<std::size_t>(s)];
  }
  const std::vector<double>& pairwise_potential(EdgeId e) const {
    return pairwise_[static_cast<std::size_t>(e)];
  }
  double pairwise_at(EdgeId e, int i, int j) const {
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    return pairwise_[static_cast<std::size_t>(e)]
                    [static_cast<std::size_t>(i) * cards_[static_cast<std::size_t>(ed.t)] + j];
  }

  // Incident edge ids in ascending order.
  const std::vector<EdgeId>& incident_edges(NodeId s) const {
    return incident_[static_cast<std::size_t>(s)];
  }
  int degree(NodeId s) const { return static_cast<int>(incident_[static_cast<std::size_t>(s)].size()); }

  // Number of edge variables y_st^k for edge e, i.e. |X_s|*|X_t|.
  int edge_var_count(EdgeId e) const {
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    return cards_[static_cast<std::size_t>(ed.s)] * cards_[static_cast<std::size_t>(ed.t)];
  }

 private:
  std::vector<int> cards_;
  std::vector<Edge> edges_;
  std::vector<std::vector<double>> local_;
  std::vector<std::vector<double>> pairwise_;
  std::vector<std::vector<EdgeId>> incident_;
};

// One chosen state per node, 0-based.
struct Assignment {
  std::vector<int> states;
};

// Flattened combined cost vector c_st for one edge, row-major over
// (state of s, state of t).
struct EdgeCost {
  EdgeId edge = -1;
  std::vector<double> values;
};

// Flat index of the joint state (i, j) within an edge block.
inline int flat_index(int i, int j, int card_t) { return i * card_t + j; }

// Combined pairwise cost Q_st[i,j] = phi_st[i,j] + phi_s[i]/|N(s)| +
// phi_t[j]/|N(t)|, flattened row-major. Local potentials are spread evenly
// over incident edges so the MAP value is unchanged. Requires both endpoints
// to have degree >= 1.
EdgeCost combined_edge_cost(const Graph& g, EdgeId e);
std::vector<EdgeCost> combined_edge_costs(const Graph& g);

// Log-score of an assignment: sum of local plus pairwise potentials.
double map_objective(const Graph& g, const Assignment& a);

// Nodes with no incident edges. These are solved by local argmax and
// excluded from the LP.
std::vector<NodeId> degree_check(const Graph& g);

// Reduced graph with isolated nodes removed. Edge ids and their order are
// preserved; node ids are renumbered densely.
struct IsolatedSplit {
  Graph reduced;
  std::vector<NodeId> kept;          // reduced id -> original id
  std::vector<int> orig_to_reduced;  // -1 for isolated nodes
  std::vector<NodeId> isolated;
};
IsolatedSplit split_isolated(const Graph& g);

}  // namespace dwmap
