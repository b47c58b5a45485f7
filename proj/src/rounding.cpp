#include "dwmap/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dwmap {

SurvivingStates fractional_nodes(const FractionalSolution& sol, double eps) {
  SurvivingStates out;
  const std::size_t n = sol.node_marginals.size();
  out.states.resize(n);
  out.fractional.assign(n, 0);
  out.argmax.assign(n, 0);
  int fractional = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::vector<double>& m = sol.node_marginals[s];
    int best = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] > eps) out.states[s].push_back(static_cast<int>(i));
      if (m[i] > m[best]) best = static_cast<int>(i);
    }
    out.argmax[s] = best;
    if (out.states[s].empty()) {
      throw std::runtime_error("node " + std::to_string(s) +
                               " has no state above eps; eps is too large");
    }
    if (out.states[s].size() > 1) {
      out.fractional[s] = 1;
      ++fractional;
    }
  }
  out.fraction_fractional = n == 0 ? 0.0 : static_cast<double>(fractional) / n;
  return out;
}

namespace {

// Depth-first search over the restricted state space in a fixed node order,
// pruned by an admissible suffix bound: exact value of the decided part plus
// the per-node maxima and per-edge maxima of everything still undecided.
class RestrictedSearch {
 public:
  RestrictedSearch(const Graph& g, const SurvivingStates& surviving,
                   const std::vector<SideConstraint>& constraints)
      : g_(g), surviving_(surviving), constraints_(constraints) {
    order_.resize(static_cast<std::size_t>(g.num_nodes()));
    std::iota(order_.begin(), order_.end(), 0);
    // Most constrained first keeps the tree narrow near the root.
    std::stable_sort(order_.begin(), order_.end(), [&](NodeId a, NodeId b) {
      return surviving.states[a].size() < surviving.states[b].size();
    });
    depth_of_.assign(order_.size(), 0);
    for (std::size_t d = 0; d < order_.size(); ++d) depth_of_[order_[d]] = static_cast<int>(d);

    // suffix_node_[d]: sum over nodes at depth >= d of their best local
    // potential within the surviving set.
    suffix_node_.assign(order_.size() + 1, 0.0);
    for (int d = static_cast<int>(order_.size()) - 1; d >= 0; --d) {
      const NodeId s = order_[d];
      double best = -std::numeric_limits<double>::infinity();
      for (int i : surviving.states[s]) best = std::max(best, g.local_potential(s)[i]);
      suffix_node_[d] = suffix_node_[d + 1] + best;
    }
    // An edge is decided once its later endpoint is assigned; until then it
    // contributes its restricted maximum to the bound.
    suffix_edge_.assign(order_.size() + 1, 0.0);
    std::vector<double> edge_best(static_cast<std::size_t>(g.num_edges()));
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      const Edge& ed = g.edge(e);
      double best = -std::numeric_limits<double>::infinity();
      for (int i : surviving.states[ed.s]) {
        for (int j : surviving.states[ed.t]) best = std::max(best, g.pairwise_at(e, i, j));
      }
      edge_best[e] = best;
    }
    for (int d = static_cast<int>(order_.size()) - 1; d >= 0; --d) {
      suffix_edge_[d] = suffix_edge_[d + 1];
      for (EdgeId e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (std::max(depth_of_[ed.s], depth_of_[ed.t]) == d) suffix_edge_[d] += edge_best[e];
      }
    }
  }

  RoundResult run() {
    best_value_ = -std::numeric_limits<double>::infinity();
    found_ = false;
    current_.states.assign(static_cast<std::size_t>(g_.num_nodes()), -1);
    dfs(0, 0.0);
    if (!found_) {
      throw UnsatisfiableError("no restricted assignment satisfies the side constraints");
    }
    RoundResult out;
    out.assignment = best_;
    out.value = best_value_;
    out.exact = true;
    return out;
  }

 private:
  void dfs(std::size_t depth, double value) {
    if (depth == order_.size()) {
      if (!constraints_.empty() && !satisfies(g_, current_, constraints_)) return;
      if (!found_ || value > best_value_) {
        best_value_ = value;
        best_ = current_;
        found_ = true;
      }
      return;
    }
    if (found_ && value + suffix_node_[depth] + suffix_edge_[depth] < best_value_ - 1e-12) {
      return;
    }
    const NodeId s = order_[depth];
    for (int state : surviving_.states[s]) {
      current_.states[s] = state;
      double v = value + g_.local_potential(s)[state];
      for (EdgeId e : g_.incident_edges(s)) {
        const Edge& ed = g_.edge(e);
        const NodeId other = ed.s == s ? ed.t : ed.s;
        if (depth_of_[other] < depth_of_[s]) {
          v += ed.s == s ? g_.pairwise_at(e, state, current_.states[other])
                         : g_.pairwise_at(e, current_.states[other], state);
        }
      }
      dfs(depth + 1, v);
    }
    current_.states[s] = -1;
  }

  const Graph& g_;
  const SurvivingStates& surviving_;
  const std::vector<SideConstraint>& constraints_;
  std::vector<NodeId> order_;
  std::vector<int> depth_of_;
  std::vector<double> suffix_node_;
  std::vector<double> suffix_edge_;
  Assignment current_;
  Assignment best_;
  double best_value_ = 0.0;
  bool found_ = false;
};

}  // namespace

RoundResult round_ip(const Graph& g, const SurvivingStates& surviving,
                     const std::vector<SideConstraint>& constraints, std::uint64_t cap) {
  if (static_cast<int>(surviving.states.size()) != g.num_nodes()) {
    throw std::invalid_argument("surviving state sets do not match the graph");
  }
  std::uint64_t space = 1;
  bool overflow = false;
  for (const std::vector<int>& s : surviving.states) {
    space *= static_cast<std::uint64_t>(s.size());
    if (space > cap) {
      overflow = true;
      break;
    }
  }
  if (overflow) {
    // Defined degradation: per-node argmax of the recovered marginals.
    RoundResult out;
    out.exact = false;
    out.assignment.states.assign(surviving.argmax.begin(), surviving.argmax.end());
    if (!constraints.empty() && !satisfies(g, out.assignment, constraints)) {
      throw UnsatisfiableError(
          "restricted space exceeds the cap and the argmax fallback violates side constraints");
    }
    out.value = map_objective(g, out.assignment);
    return out;
  }
  return RestrictedSearch(g, surviving, constraints).run();
}

}  // namespace dwmap
