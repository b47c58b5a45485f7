#include "dwmap/decomposition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace dwmap {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Column of B_st at flat index k, as a sparse vector over global rows.
std::vector<std::pair<int, double>> constraint_column_at(const EdgePricingData& data, int k) {
  std::vector<std::pair<int, double>> out;
  for (const EdgeBlockRow& br : data.rows) {
    for (const auto& [idx, coeff] : br.entries) {
      if (idx == k && coeff != 0.0) {
        out.push_back({br.row, coeff});
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<EdgePricingData> make_pricing_data(const Graph& g,
                                               const std::vector<EdgeCost>& costs,
                                               const ConstraintSystem& cs) {
  if (static_cast<int>(costs.size()) != g.num_edges() || cs.num_edges() != g.num_edges()) {
    throw std::invalid_argument("costs/constraint system do not match the graph");
  }
  std::vector<EdgePricingData> out(static_cast<std::size_t>(g.num_edges()));
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (costs[e].edge != e ||
        static_cast<int>(costs[e].values.size()) != g.edge_var_count(e)) {
      throw std::invalid_argument("cost vector mismatch at edge " + std::to_string(e));
    }
    out[e].edge = e;
    out[e].cost = costs[e].values;
    out[e].rows = cs.edge_block(e);
  }
  return out;
}

Candidate price_subprogram(const EdgePricingData& data, std::span<const double> pi,
                           double gamma, TieRule rule) {
  std::vector<double> adjusted = data.cost;
  for (const EdgeBlockRow& br : data.rows) {
    if (br.row < 0 || br.row >= static_cast<int>(pi.size())) {
      throw std::invalid_argument("dual vector not dimensioned for row " +
                                  std::to_string(br.row));
    }
    const double p = pi[br.row];
    if (p == 0.0) continue;
    for (const auto& [k, coeff] : br.entries) adjusted[k] -= p * coeff;
  }

  int best = 0;
  for (int k = 1; k < static_cast<int>(adjusted.size()); ++k) {
    if (adjusted[k] > adjusted[best]) best = k;
  }
  if (rule == TieRule::MaxCost) {
    // Among exact ties of the adjusted maximum, take the index whose actual
    // cost is largest (lowest index on a further tie).
    for (int k = 0; k < static_cast<int>(adjusted.size()); ++k) {
      if (adjusted[k] == adjusted[best] && data.cost[k] > data.cost[best]) best = k;
    }
  }

  Candidate cand;
  cand.column.edge = data.edge;
  cand.column.solution_index = best;
  cand.column.cost = data.cost[best];
  cand.column.constraint_column = constraint_column_at(data, best);
  cand.reduced_cost = adjusted[best] - gamma;
  return cand;
}

std::vector<std::vector<double>> initialization_scores(const Graph& g) {
  std::vector<std::vector<double>> scores;
  scores.reserve(g.num_nodes());
  for (NodeId s = 0; s < g.num_nodes(); ++s) scores.push_back(g.local_potential(s));
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    const int cs = g.cardinality(ed.s);
    const int ct = g.cardinality(ed.t);
    const std::vector<double>& table = g.pairwise_potential(e);
    for (int i = 0; i < cs; ++i) {
      for (int j = 0; j < ct; ++j) {
        const double v = table[flat_index(i, j, ct)];
        scores[ed.s][i] += v;
        scores[ed.t][j] += v;
      }
    }
  }
  return scores;
}

std::vector<Column> select_columns(const std::vector<Candidate>& candidates, int cap,
                                   double tol, const std::set<ColumnKey>& pooled) {
  std::vector<const Candidate*> eligible;
  for (const Candidate& c : candidates) {
    if (c.reduced_cost <= tol) continue;
    if (pooled.count({c.column.edge, c.column.solution_index})) continue;
    eligible.push_back(&c);
  }
  std::sort(eligible.begin(), eligible.end(), [](const Candidate* a, const Candidate* b) {
    if (a->column.cost != b->column.cost) return a->column.cost > b->column.cost;
    if (a->column.edge != b->column.edge) return a->column.edge < b->column.edge;
    return a->column.solution_index < b->column.solution_index;
  });
  if (cap >= 0 && static_cast<int>(eligible.size()) > cap) eligible.resize(cap);
  std::vector<Column> out;
  out.reserve(eligible.size());
  for (const Candidate* c : eligible) out.push_back(c->column);
  return out;
}

DwSolver::DwSolver(const Graph& graph, const std::vector<EdgeCost>& costs,
                   ConstraintSystem cs, DwConfig cfg)
    : graph_(graph), cs_(std::move(cs)), cfg_(cfg) {
  if (cfg_.columns_per_iteration < 1) {
    throw std::invalid_argument("columns_per_iteration must be at least 1");
  }
  data_ = make_pricing_data(graph_, costs, cs_);
}

Assignment DwSolver::initialize() {
  const std::vector<std::vector<double>> scores = initialization_scores(graph_);
  Assignment x;
  x.states.resize(graph_.num_nodes());
  for (NodeId s = 0; s < graph_.num_nodes(); ++s) {
    int best = 0;
    for (int i = 1; i < graph_.cardinality(s); ++i) {
      if (scores[s][i] > scores[s][best]) best = i;
    }
    x.states[s] = best;
  }
  initialize_with(x);
  return x;
}

void DwSolver::initialize_with(const Assignment& x) {
  if (static_cast<int>(x.states.size()) != graph_.num_nodes()) {
    throw std::invalid_argument("assignment length mismatch");
  }
  for (NodeId s = 0; s < graph_.num_nodes(); ++s) {
    if (graph_.degree(s) == 0) {
      throw std::invalid_argument("graph has isolated node " + std::to_string(s) +
                                  "; split it off first");
    }
    if (x.states[s] < 0 || x.states[s] >= graph_.cardinality(s)) {
      throw std::invalid_argument("invalid state at node " + std::to_string(s));
    }
  }

  pool_.clear();
  pool_keys_.clear();
  for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
    const Edge& ed = graph_.edge(e);
    const int k = flat_index(x.states[ed.s], x.states[ed.t], graph_.cardinality(ed.t));
    Column col;
    col.edge = e;
    col.solution_index = k;
    col.cost = data_[e].cost[k];
    col.constraint_column = constraint_column_at(data_[e], k);
    col.iteration = 0;
    pool_keys_.insert({e, k});
    pool_.push_back(std::move(col));
  }

  // The consistency rows hold exactly by construction; side rows must be
  // satisfied by the starting assignment (use feasible_init upstream).
  std::vector<double> row_value(static_cast<std::size_t>(cs_.num_rows()), 0.0);
  for (const Column& col : pool_) {
    for (const auto& [r, coeff] : col.constraint_column) row_value[r] += coeff;
  }
  for (int r = 0; r < cs_.num_rows(); ++r) {
    const ConstraintRow& row = cs_.row(r);
    if (row.kind != RowKind::Side) continue;
    const double v = row_value[r];
    const bool ok = (row.sense == Sense::LE && v <= row.rhs + 1e-9) ||
                    (row.sense == Sense::GE && v >= row.rhs - 1e-9) ||
                    (row.sense == Sense::EQ && std::abs(v - row.rhs) <= 1e-9);
    if (!ok) {
      throw std::runtime_error("initial assignment violates side constraint row " +
                               std::to_string(r));
    }
  }

  duals_.pi.assign(static_cast<std::size_t>(cs_.num_rows()), 0.0);
  duals_.gamma.assign(static_cast<std::size_t>(graph_.num_edges()), 0.0);
  master_ = MasterSolution{};
  trace_.clear();
  iterations_ = 0;
  last_max_rc_ = 0.0;
  initialized_ = true;
  master_solved_ = false;
  converged_ = false;
}

std::vector<Candidate> DwSolver::price_all_serial(const Duals& duals, TieRule rule) const {
  std::vector<Candidate> out;
  out.reserve(data_.size());
  for (const EdgePricingData& d : data_) {
    out.push_back(price_subprogram(d, duals.pi, duals.gamma[d.edge], rule));
  }
  return out;
}

bool DwSolver::step() {
  if (!initialized_) throw std::logic_error("step() before initialize()");
  if (converged_) return true;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Candidate> candidates;
  std::uint64_t tx = 0, rx = 0;
  if (pricer_ != nullptr) {
    candidates = pricer_->price_all(duals_, cfg_.tie_rule);
    tx = pricer_->last_bytes_sent();
    rx = pricer_->last_bytes_received();
  } else {
    candidates = price_all_serial(duals_, cfg_.tie_rule);
  }
  const double pricing_ms = ms_since(t0);

  last_max_rc_ = -std::numeric_limits<double>::infinity();
  for (const Candidate& c : candidates) last_max_rc_ = std::max(last_max_rc_, c.reduced_cost);

  // Optimality certificate: no subprogram can improve the master.
  if (master_solved_ && last_max_rc_ <= cfg_.tol) {
    converged_ = true;
    return true;
  }

  std::vector<Column> fresh =
      select_columns(candidates, cfg_.columns_per_iteration, cfg_.tol, pool_keys_);
  if (fresh.empty() && master_solved_) {
    // All improving candidates are already pooled, which optimal master
    // duals rule out. Fail loudly instead of looping.
    throw std::runtime_error("column generation stalled (max reduced cost " +
                             std::to_string(last_max_rc_) + ")");
  }
  for (Column& col : fresh) {
    col.iteration = iterations_ + 1;
    pool_keys_.insert({col.edge, col.solution_index});
    pool_.push_back(std::move(col));
  }

  solve_master(static_cast<int>(fresh.size()), pricing_ms, tx, rx);
  return false;
}

void DwSolver::solve_master(int columns_added, double pricing_ms, std::uint64_t tx,
                            std::uint64_t rx) {
  const auto t0 = std::chrono::steady_clock::now();
  MasterSolution next = solve_restricted_master(pool_, cs_, cfg_.master);
  const double master_ms = ms_since(t0);
  if (next.status != LPStatus::Optimal) {
    // Infeasibility here would mean a constraint-system bug: a valid
    // initialization always provides a feasible master.
    throw std::runtime_error("master solve failed: " + to_string(next.status));
  }
  master_ = std::move(next);
  duals_.pi = master_.pi;
  duals_.gamma = master_.gamma;
  master_solved_ = true;
  ++iterations_;
  trace_.push_back({iterations_, master_.objective, columns_added,
                    static_cast<int>(pool_.size()), master_ms, pricing_ms, tx, rx});
  if (cfg_.purge_after_seconds >= 0.0 && master_ms > cfg_.purge_after_seconds * 1000.0) {
    purge_nonbasic();
  }
}

bool DwSolver::run() {
  if (!initialized_) initialize();
  while (!converged_ && iterations_ < cfg_.max_iterations) {
    if (step()) break;
  }
  return converged_;
}

int DwSolver::purge_nonbasic() {
  if (!master_solved_) throw std::logic_error("purge before any master solve");
  const int n = static_cast<int>(pool_.size());
  std::vector<char> keep(master_.basic.begin(), master_.basic.end());
  // Convexity keeps at least one basic column per edge; guard anyway.
  std::vector<int> kept_per_edge(static_cast<std::size_t>(graph_.num_edges()), 0);
  for (int i = 0; i < n; ++i) {
    if (keep[i]) ++kept_per_edge[pool_[i].edge];
  }
  for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
    if (kept_per_edge[e] > 0) continue;
    int best = -1;
    for (int i = 0; i < n; ++i) {
      if (pool_[i].edge == e && (best < 0 || master_.alpha[i] > master_.alpha[best])) best = i;
    }
    keep[best] = 1;
  }

  std::vector<Column> pool;
  std::vector<double> alpha;
  std::vector<char> basic;
  std::set<ColumnKey> keys;
  for (int i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    keys.insert({pool_[i].edge, pool_[i].solution_index});
    pool.push_back(std::move(pool_[i]));
    alpha.push_back(master_.alpha[i]);
    basic.push_back(master_.basic[i]);
  }
  const int removed = n - static_cast<int>(pool.size());
  pool_ = std::move(pool);
  pool_keys_ = std::move(keys);
  master_.alpha = std::move(alpha);
  master_.basic = std::move(basic);
  return removed;
}

FractionalSolution DwSolver::recover() const {
  if (!master_solved_) throw std::logic_error("recover before any master solve");
  FractionalSolution sol;
  sol.edge_vars.resize(graph_.num_edges());
  for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
    sol.edge_vars[e].assign(static_cast<std::size_t>(graph_.edge_var_count(e)), 0.0);
  }
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    const double a = master_.alpha[i];
    if (a == 0.0) continue;
    sol.edge_vars[pool_[i].edge][pool_[i].solution_index] += a;
  }
  sol.objective = 0.0;
  for (EdgeId e = 0; e < graph_.num_edges(); ++e) {
    std::vector<double>& y = sol.edge_vars[e];
    double mass = 0.0;
    for (double& v : y) {
      if (v < 0.0 && v > -1e-7) v = 0.0;  // dual-degenerate dust
      mass += v;
    }
    if (std::abs(mass - 1.0) > 1e-7) {
      throw std::runtime_error("recovered edge variable does not sum to 1 on edge " +
                               std::to_string(e));
    }
    for (std::size_t k = 0; k < y.size(); ++k) sol.objective += data_[e].cost[k] * y[k];
  }

  // Node marginals from the lowest-id incident edge; provisional before
  // convergence, consistent across incident edges at convergence.
  sol.node_marginals.resize(graph_.num_nodes());
  for (NodeId s = 0; s < graph_.num_nodes(); ++s) {
    const EdgeId e = graph_.incident_edges(s)[0];
    const Endpoint end = graph_.edge(e).s == s ? Endpoint::S : Endpoint::T;
    sol.node_marginals[s] = marginalize(graph_, e, end, sol.edge_vars[e]);
  }
  if (converged_) {
    for (NodeId s = 0; s < graph_.num_nodes(); ++s) {
      for (EdgeId e : graph_.incident_edges(s)) {
        const Endpoint end = graph_.edge(e).s == s ? Endpoint::S : Endpoint::T;
        const std::vector<double> m = marginalize(graph_, e, end, sol.edge_vars[e]);
        for (int i = 0; i < graph_.cardinality(s); ++i) {
          if (std::abs(m[i] - sol.node_marginals[s][i]) > 1e-7) {
            throw std::runtime_error("inconsistent marginals at node " + std::to_string(s) +
                                     " after convergence");
          }
        }
      }
    }
  }
  return sol;
}

std::vector<Candidate> DwSolver::reprice() const {
  return price_all_serial(duals_, cfg_.tie_rule);
}

}  // namespace dwmap
