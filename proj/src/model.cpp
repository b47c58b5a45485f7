#include "dwmap/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace dwmap {

namespace {

void check_finite(const std::vector<double>& v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(what + " contains a non-finite entry");
    }
  }
}

}  // namespace

Graph::Graph(std::vector<int> cardinalities, std::vector<Edge> edges,
             std::vector<std::vector<double>> local_potentials,
             std::vector<std::vector<double>> pairwise_potentials)
    : cards_(std::move(cardinalities)),
      edges_(std::move(edges)),
      local_(std::move(local_potentials)),
      pairwise_(std::move(pairwise_potentials)) {
  const int n = num_nodes();
  for (int s = 0; s < n; ++s) {
    if (cards_[s] < 1) {
      throw std::invalid_argument("node " + std::to_string(s) + " has cardinality < 1");
    }
  }
  if (local_.size() != cards_.size()) {
    throw std::invalid_argument("local potential count does not match node count");
  }
  for (int s = 0; s < n; ++s) {
    if (static_cast<int>(local_[s].size()) != cards_[s]) {
      throw std::invalid_argument("local potential length mismatch at node " + std::to_string(s));
    }
    check_finite(local_[s], "local potential of node " + std::to_string(s));
  }
  if (pairwise_.size() != edges_.size()) {
    throw std::invalid_argument("pairwise potential count does not match edge count");
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.s < 0 || ed.s >= n || ed.t < 0 || ed.t >= n) {
      throw std::invalid_argument("edge " + std::to_string(e) + " has an invalid endpoint");
    }
    if (ed.s == ed.t) {
      throw std::invalid_argument("edge " + std::to_string(e) + " is a self-loop");
    }
    auto key = std::minmax(ed.s, ed.t);
    if (!seen.insert(key).second) {
      throw std::invalid_argument("duplicate edge between nodes " + std::to_string(key.first) +
                                  " and " + std::to_string(key.second));
    }
    const std::size_t want =
        static_cast<std::size_t>(cards_[ed.s]) * static_cast<std::size_t>(cards_[ed.t]);
    if (pairwise_[e].size() != want) {
      throw std::invalid_argument("pairwise table size mismatch at edge " + std::to_string(e));
    }
    check_finite(pairwise_[e], "pairwise potential of edge " + std::to_string(e));
  }
  incident_.assign(cards_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    incident_[edges_[e].s].push_back(static_cast<EdgeId>(e));
    incident_[edges_[e].t].push_back(static_cast<EdgeId>(e));
  }
}

EdgeCost combined_edge_cost(const Graph& g, EdgeId e) {
  if (e < 0 || e >= g.num_edges()) {
    throw std::out_of_range("unknown edge id " + std::to_string(e));
  }
  const Edge& ed = g.edge(e);
  const int deg_s = g.degree(ed.s);
  const int deg_t = g.degree(ed.t);
  if (deg_s < 1 || deg_t < 1) {
    throw std::invalid_argument("edge endpoint with degree 0");
  }
  const int cs = g.cardinality(ed.s);
  const int ct = g.cardinality(ed.t);
  const std::vector<double>& phi_s = g.local_potential(ed.s);
  const std::vector<double>& phi_t = g.local_potential(ed.t);
  const std::vector<double>& phi_st = g.pairwise_potential(e);

  EdgeCost out;
  out.edge = e;
  out.values.resize(static_cast<std::size_t>(cs) * ct);
  for (int i = 0; i < cs; ++i) {
    const double share_s = phi_s[i] / deg_s;
    for (int j = 0; j < ct; ++j) {
      out.values[flat_index(i, j, ct)] = phi_st[flat_index(i, j, ct)] + share_s + phi_t[j] / deg_t;
    }
  }
  return out;
}

std::vector<EdgeCost> combined_edge_costs(const Graph& g) {
  std::vector<EdgeCost> out;
  out.reserve(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    out.push_back(combined_edge_cost(g, e));
  }
  return out;
}

double map_objective(const Graph& g, const Assignment& a) {
  if (static_cast<int>(a.states.size()) != g.num_nodes()) {
    throw std::invalid_argument("assignment length does not match node count");
  }
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (a.states[s] < 0 || a.states[s] >= g.cardinality(s)) {
      throw std::invalid_argument("invalid state index at node " + std::to_string(s));
    }
  }
  double value = 0.0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    value += g.local_potential(s)[a.states[s]];
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    value += g.pairwise_at(e, a.states[ed.s], a.states[ed.t]);
  }
  return value;
}

std::vector<NodeId> degree_check(const Graph& g) {
  std::vector<NodeId> isolated;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (g.degree(s) == 0) isolated.push_back(s);
  }
  return isolated;
}

IsolatedSplit split_isolated(const Graph& g) {
  IsolatedSplit out;
  out.isolated = degree_check(g);
  out.orig_to_reduced.assign(g.num_nodes(), -1);
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (g.degree(s) > 0) {
      out.orig_to_reduced[s] = static_cast<int>(out.kept.size());
      out.kept.push_back(s);
    }
  }
  std::vector<int> cards;
  std::vector<std::vector<double>> local;
  cards.reserve(out.kept.size());
  local.reserve(out.kept.size());
  for (NodeId s : out.kept) {
    cards.push_back(g.cardinality(s));
    local.push_back(g.local_potential(s));
  }
  std::vector<Edge> edges;
  std::vector<std::vector<double>> pairwise;
  edges.reserve(g.num_edges());
  pairwise.reserve(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    edges.push_back({out.orig_to_reduced[ed.s], out.orig_to_reduced[ed.t]});
    pairwise.push_back(g.pairwise_potential(e));
  }
  out.reduced = Graph(std::move(cards), std::move(edges), std::move(local), std::move(pairwise));
  return out;
}

}  // namespace dwmap
