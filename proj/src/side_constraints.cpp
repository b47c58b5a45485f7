#include "dwmap/side_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "dwmap/decomposition.hpp"

namespace dwmap {

namespace {

constexpr double kEps = 1e-9;

// Node-level linear row: sum of coeff * [x_s == state] against sense/rhs.
struct NodeRow {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

void check_term(const Graph& g, const LinearTerm& t) {
  if (t.node < 0 || t.node >= g.num_nodes() || t.state < 0 || t.state >= g.cardinality(t.node)) {
    throw std::invalid_argument("side constraint references invalid (node, state) pair (" +
                                std::to_string(t.node) + ", " + std::to_string(t.state) + ")");
  }
}

std::vector<NodeRow> expand(const Graph& g, const std::vector<SideConstraint>& constraints) {
  std::vector<NodeRow> rows;
  for (const SideConstraint& sc : constraints) {
    if (sc.kind == SideConstraint::Kind::AtMostOnePerState) {
      int max_card = 0;
      for (NodeId s = 0; s < g.num_nodes(); ++s) max_card = std::max(max_card, g.cardinality(s));
      if (sc.outlier_state >= max_card) {
        throw std::invalid_argument("outlier state " + std::to_string(sc.outlier_state) +
                                    " is not a valid state of any node");
      }
      for (int state = 0; state < max_card; ++state) {
        if (state == sc.outlier_state) continue;
        NodeRow row;
        row.sense = Sense::LE;
        row.rhs = 1.0;
        for (NodeId s = 0; s < g.num_nodes(); ++s) {
          if (state < g.cardinality(s)) row.terms.push_back({s, state, 1.0});
        }
        if (!row.terms.empty()) rows.push_back(std::move(row));
      }
    } else {
      NodeRow row;
      row.sense = sc.sense;
      row.rhs = sc.rhs;
      for (const LinearTerm& t : sc.terms) {
        check_term(g, t);
        row.terms.push_back(t);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

bool row_holds(double v, Sense sense, double rhs) {
  switch (sense) {
    case Sense::LE: return v <= rhs + kEps;
    case Sense::GE: return v >= rhs - kEps;
    case Sense::EQ: return std::abs(v - rhs) <= kEps;
  }
  return false;
}

}  // namespace

void inject(ConstraintSystem& cs, const std::vector<SideConstraint>& constraints,
            const Graph& g) {
  if (cs.num_edges() != g.num_edges()) {
    throw std::invalid_argument("constraint system does not match the graph");
  }
  for (const NodeRow& nrow : expand(g, constraints)) {
    // Accumulate coefficients per designated edge; two constrained nodes may
    // share one.
    std::map<EdgeId, std::map<int, double>> per_edge;
    for (const LinearTerm& t : nrow.terms) {
      if (g.degree(t.node) == 0) {
        throw std::invalid_argument("side constraint over isolated node " +
                                    std::to_string(t.node));
      }
      const EdgeId e = g.incident_edges(t.node)[0];
      const Marginalizer marg{e, g.edge(e).s == t.node ? Endpoint::S : Endpoint::T};
      for (int k : marg.row_support(g, t.state)) per_edge[e][k] += t.coeff;
    }
    ConstraintRow row;
    row.kind = RowKind::Side;
    row.sense = nrow.sense;
    row.rhs = nrow.rhs;
    for (const auto& [e, entries] : per_edge) {
      SparseBlock block{e, {}};
      for (const auto& [k, coeff] : entries) {
        if (coeff != 0.0) block.entries.push_back({k, coeff});
      }
      if (!block.entries.empty()) row.blocks.push_back(std::move(block));
    }
    cs.append_row(std::move(row));
  }
}

bool satisfies(const Graph& g, const Assignment& a,
               const std::vector<SideConstraint>& constraints) {
  for (const NodeRow& row : expand(g, constraints)) {
    double v = 0.0;
    for (const LinearTerm& t : row.terms) {
      if (a.states[t.node] == t.state) v += t.coeff;
    }
    if (!row_holds(v, row.sense, row.rhs)) return false;
  }
  return true;
}

namespace {

// Interval-based pruning for partial assignments: a row stays alive while
// [assigned + min_remaining, assigned + max_remaining] can still meet it.
class PartialChecker {
 public:
  PartialChecker(const Graph& g, const std::vector<NodeRow>& rows) : rows_(rows) {
    per_node_.resize(static_cast<std::size_t>(g.num_nodes()));
    info_.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::map<NodeId, std::map<int, double>> coeff;
      for (const LinearTerm& t : rows[r].terms) coeff[t.node][t.state] += t.coeff;
      for (const auto& [node, by_state] : coeff) {
        NodeContribution nc;
        nc.row = static_cast<int>(r);
        nc.by_state = by_state;
        double mn = std::numeric_limits<double>::infinity();
        double mx = -std::numeric_limits<double>::infinity();
        for (const auto& [state, c] : by_state) {
          mn = std::min(mn, c);
          mx = std::max(mx, c);
        }
        if (static_cast<int>(by_state.size()) < g.cardinality(node)) {
          mn = std::min(mn, 0.0);  // some state of this node is outside the row
          mx = std::max(mx, 0.0);
        }
        nc.min_c = mn;
        nc.max_c = mx;
        info_[r].min_rem += mn;
        info_[r].max_rem += mx;
        per_node_[node].push_back(std::move(nc));
      }
    }
  }

  bool assign(NodeId node, int state) {
    for (const NodeContribution& nc : per_node_[node]) {
      RowInfo& ri = info_[nc.row];
      auto it = nc.by_state.find(state);
      ri.assigned += (it == nc.by_state.end()) ? 0.0 : it->second;
      ri.min_rem -= nc.min_c;
      ri.max_rem -= nc.max_c;
    }
    for (const NodeContribution& nc : per_node_[node]) {
      if (!alive(nc.row)) {
        unassign(node, state);
        return false;
      }
    }
    return true;
  }

  void unassign(NodeId node, int state) {
    for (const NodeContribution& nc : per_node_[node]) {
      RowInfo& ri = info_[nc.row];
      auto it = nc.by_state.find(state);
      ri.assigned -= (it == nc.by_state.end()) ? 0.0 : it->second;
      ri.min_rem += nc.min_c;
      ri.max_rem += nc.max_c;
    }
  }

 private:
  struct NodeContribution {
    int row = -1;
    std::map<int, double> by_state;
    double min_c = 0.0;
    double max_c = 0.0;
  };
  struct RowInfo {
    double assigned = 0.0;
    double min_rem = 0.0;
    double max_rem = 0.0;
  };

  bool alive(int r) const {
    const RowInfo& ri = info_[r];
    const double lo = ri.assigned + ri.min_rem;
    const double hi = ri.assigned + ri.max_rem;
    switch (rows_[r].sense) {
      case Sense::LE: return lo <= rows_[r].rhs + kEps;
      case Sense::GE: return hi >= rows_[r].rhs - kEps;
      case Sense::EQ: return lo <= rows_[r].rhs + kEps && hi >= rows_[r].rhs - kEps;
    }
    return false;
  }

  const std::vector<NodeRow>& rows_;
  std::vector<std::vector<NodeContribution>> per_node_;
  std::vector<RowInfo> info_;
};

}  // namespace

Assignment feasible_init(const Graph& g, const std::vector<SideConstraint>& constraints,
                         const FeasibleInitOptions& opts) {
  const std::vector<NodeRow> rows = expand(g, constraints);
  const std::vector<std::vector<double>> scores = initialization_scores(g);

  // Nodes in descending-degree order; per node, states in descending score
  // order (lowest index first on ties), matching the unconstrained
  // initialization when no constraint bites.
  std::vector<NodeId> order(static_cast<std::size_t>(g.num_nodes()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return g.degree(a) > g.degree(b); });
  std::vector<std::vector<int>> ranked(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    ranked[s].resize(static_cast<std::size_t>(g.cardinality(s)));
    std::iota(ranked[s].begin(), ranked[s].end(), 0);
    std::stable_sort(ranked[s].begin(), ranked[s].end(),
                     [&](int a, int b) { return scores[s][a] > scores[s][b]; });
  }

  Assignment x;
  x.states.assign(static_cast<std::size_t>(g.num_nodes()), -1);

  {
    PartialChecker checker(g, rows);
    bool ok = true;
    for (NodeId s : order) {
      bool placed = false;
      for (int state : ranked[s]) {
        if (checker.assign(s, state)) {
          x.states[s] = state;
          placed = true;
          break;
        }
      }
      if (!placed) {
        ok = false;
        break;
      }
    }
    if (ok) return x;
  }

  if (g.num_nodes() > opts.max_nodes_exhaustive) {
    throw std::runtime_error(
        "greedy initialization failed and the graph exceeds the exhaustive search cap (" +
        std::to_string(opts.max_nodes_exhaustive) + " nodes)");
  }

  // Exhaustive backtracking over the same orders.
  PartialChecker checker(g, rows);
  std::fill(x.states.begin(), x.states.end(), -1);
  long long expansions = 0;
  auto dfs = [&](auto&& self, std::size_t depth) -> bool {
    if (depth == order.size()) return true;
    const NodeId s = order[depth];
    for (int state : ranked[s]) {
      if (++expansions > opts.max_expansions) {
        throw std::runtime_error("feasible_init exceeded its search budget");
      }
      if (!checker.assign(s, state)) continue;
      x.states[s] = state;
      if (self(self, depth + 1)) return true;
      checker.unassign(s, state);
      x.states[s] = -1;
    }
    return false;
  };
  if (dfs(dfs, 0)) return x;
  throw UnsatisfiableError("side constraints admit no feasible assignment");
}

}  // namespace dwmap
