#include "dwmap/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dwmap {

BruteForceResult brute_force_map(const Graph& g, const std::vector<SideConstraint>& constraints,
                                 std::uint64_t cap) {
  std::uint64_t space = 1;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    space *= static_cast<std::uint64_t>(g.cardinality(s));
    if (space > cap) {
      throw std::length_error("state space exceeds the brute-force cap");
    }
  }

  BruteForceResult best;
  best.value = -std::numeric_limits<double>::infinity();
  Assignment a;
  a.states.assign(static_cast<std::size_t>(g.num_nodes()), 0);
  bool found = false;
  while (true) {
    if (constraints.empty() || satisfies(g, a, constraints)) {
      const double v = map_objective(g, a);
      if (!found || v > best.value) {
        best.value = v;
        best.assignment = a;
        found = true;
      }
    }
    // Odometer over states, last node fastest.
    int s = g.num_nodes() - 1;
    while (s >= 0) {
      if (++a.states[s] < g.cardinality(s)) break;
      a.states[s] = 0;
      --s;
    }
    if (s < 0) break;
  }
  if (!found) throw UnsatisfiableError("no assignment satisfies the side constraints");
  return best;
}

MaxProductResult max_product(const Graph& g, int max_iters, double damping) {
  const int m = g.num_edges();
  // Two directed messages per edge: 2e is s->t (over t's states), 2e+1 is
  // t->s (over s's states).
  std::vector<std::vector<double>> msg(static_cast<std::size_t>(2 * m));
  for (EdgeId e = 0; e < m; ++e) {
    msg[2 * e].assign(static_cast<std::size_t>(g.cardinality(g.edge(e).t)), 0.0);
    msg[2 * e + 1].assign(static_cast<std::size_t>(g.cardinality(g.edge(e).s)), 0.0);
  }

  auto pre_message = [&](NodeId s, EdgeId skip) {
    // phi_s plus all incoming messages except the one along `skip`.
    std::vector<double> h = g.local_potential(s);
    for (EdgeId e : g.incident_edges(s)) {
      if (e == skip) continue;
      const std::vector<double>& in = (g.edge(e).s == s) ? msg[2 * e + 1] : msg[2 * e];
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += in[i];
    }
    return h;
  };

  MaxProductResult out;
  double delta = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iters && delta >= 1e-9; ++it) {
    delta = 0.0;
    std::vector<std::vector<double>> next(msg.size());
    for (EdgeId e = 0; e < m; ++e) {
      const Edge& ed = g.edge(e);
      const int cs = g.cardinality(ed.s);
      const int ct = g.cardinality(ed.t);
      const std::vector<double> hs = pre_message(ed.s, e);
      const std::vector<double> ht = pre_message(ed.t, e);

      std::vector<double> st(static_cast<std::size_t>(ct),
                             -std::numeric_limits<double>::infinity());
      std::vector<double> ts(static_cast<std::size_t>(cs),
                             -std::numeric_limits<double>::infinity());
      for (int i = 0; i < cs; ++i) {
        for (int j = 0; j < ct; ++j) {
          const double w = g.pairwise_at(e, i, j);
          st[j] = std::max(st[j], hs[i] + w);
          ts[i] = std::max(ts[i], ht[j] + w);
        }
      }
      auto normalize = [](std::vector<double>& v) {
        const double mx = *std::max_element(v.begin(), v.end());
        for (double& x : v) x -= mx;
      };
      normalize(st);
      normalize(ts);
      if (damping > 0.0) {
        for (std::size_t j = 0; j < st.size(); ++j)
          st[j] = (1.0 - damping) * st[j] + damping * msg[2 * e][j];
        for (std::size_t i = 0; i < ts.size(); ++i)
          ts[i] = (1.0 - damping) * ts[i] + damping * msg[2 * e + 1][i];
      }
      for (std::size_t j = 0; j < st.size(); ++j)
        delta = std::max(delta, std::abs(st[j] - msg[2 * e][j]));
      for (std::size_t i = 0; i < ts.size(); ++i)
        delta = std::max(delta, std::abs(ts[i] - msg[2 * e + 1][i]));
      next[2 * e] = std::move(st);
      next[2 * e + 1] = std::move(ts);
    }
    msg = std::move(next);
  }
  out.converged = delta < 1e-9;
  out.iterations = it;

  out.assignment.states.resize(static_cast<std::size_t>(g.num_nodes()));
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    const std::vector<double> belief = pre_message(s, -1);
    int best = 0;
    for (int i = 1; i < g.cardinality(s); ++i) {
      if (belief[i] > belief[best]) best = i;
    }
    out.assignment.states[s] = best;
  }
  return out;
}

}  // namespace dwmap
