#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dwmap/column.hpp"
#include "dwmap/model.hpp"
#include "dwmap/relaxation.hpp"
#include "dwmap/simplex.hpp"

namespace dwmap {

// Subprogram tie breaking: lowest solution index, or the index whose actual
// (unadjusted) cost is maximal.
enum class TieRule { LowestIndex, MaxCost };

struct Duals {
  std::vector<double> pi;     // per constraint-system row
  std::vector<double> gamma;  // per edge
};

// Everything a pricer needs for one edge: the cost vector c_st and the rows
// of B_st restricted to this edge. This is also the unit shipped to remote
// workers.
struct EdgePricingData {
  EdgeId edge = -1;
  std::vector<double> cost;
  std::vector<EdgeBlockRow> rows;  // ascending row id
};

std::vector<EdgePricingData> make_pricing_data(const Graph& g,
                                               const std::vector<EdgeCost>& costs,
                                               const ConstraintSystem& cs);

struct Candidate {
  Column column;
  double reduced_cost = 0.0;
};

// Maximizes the adjusted cost c_st - B_st^T pi over the one-hot extreme
// points of the edge simplex; reduced cost is the best adjusted value minus
// gamma. pi must be dimensioned for the full row index.
Candidate price_subprogram(const EdgePricingData& data, std::span<const double> pi,
                           double gamma, TieRule rule);

// Per-node scores used by the one-step initialization: local potential plus
// the pairwise potentials marginalized over each neighbour.
std::vector<std::vector<double>> initialization_scores(const Graph& g);

using ColumnKey = std::pair<EdgeId, int>;

// Keeps candidates with reduced cost above tol that are not already pooled,
// sorted by cost descending, truncated to cap.
std::vector<Column> select_columns(const std::vector<Candidate>& candidates, int cap,
                                   double tol, const std::set<ColumnKey>& pooled);

// Pricing backend. price_all returns exactly one candidate per edge, in
// ascending edge order, bit-identical to serial pricing.
class Pricer {
 public:
  virtual ~Pricer() = default;
  virtual std::vector<Candidate> price_all(const Duals& duals, TieRule rule) = 0;
  virtual std::uint64_t last_bytes_sent() const { return 0; }
  virtual std::uint64_t last_bytes_received() const { return 0; }
};

struct DwConfig {
  int max_iterations = 1000;
  int columns_per_iteration = 200;
  double tol = 1e-9;
  TieRule tie_rule = TieRule::LowestIndex;
  double purge_after_seconds = -1.0;  // < 0 disables purging
  SimplexOptions master;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  int columns_added = 0;
  int pool_size = 0;
  double master_ms = 0.0;
  double pricing_ms = 0.0;
  std::uint64_t bytes_tx = 0;
  std::uint64_t bytes_rx = 0;
};

// Recovered solution of the edge-variable LP: y per edge, node marginals,
// and the LP objective.
struct FractionalSolution {
  std::vector<std::vector<double>> edge_vars;
  std::vector<std::vector<double>> node_marginals;
  double objective = 0.0;
};

// Dantzig-Wolfe driver: initialization, pricing, master updates, column
// policies, convergence and solution recovery.
class DwSolver {
 public:
  // graph must outlive the solver. Throws if costs does not cover every
  // edge or cs was built for a different edge count.
  DwSolver(const Graph& graph, const std::vector<EdgeCost>& costs, ConstraintSystem cs,
           DwConfig cfg = {});

  // Optional external pricing backend (thread pool, remote workers). The
  // default prices serially in-process.
  void set_pricer(Pricer* pricer) { pricer_ = pricer; }

  // One-step initialization: per-node argmax of the adjusted local scores,
  // mapped to one column per edge. The consistency rows evaluate to exactly
  // zero on these columns. Returns the initial assignment.
  Assignment initialize();
  // Start from a caller-chosen assignment (e.g. one satisfying side
  // constraints). Throws if the assignment violates a side row.
  void initialize_with(const Assignment& x);

  // One iteration: price, test optimality, add columns, re-solve the
  // master. Returns true once converged. The master objective never
  // decreases across iterations.
  bool step();
  // Runs until convergence or the iteration cap; true if converged.
  bool run();

  // Removes columns non-basic in the last optimal master basis, keeping at
  // least one column per edge. Returns the number removed.
  int purge_nonbasic();

  FractionalSolution recover() const;

  // Serial re-pricing of every edge at the current duals (optimality
  // certificate support).
  std::vector<Candidate> reprice() const;

  bool initialized() const { return initialized_; }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }
  double objective() const { return master_.objective; }
  const Duals& duals() const { return duals_; }
  const std::vector<Column>& pool() const { return pool_; }
  const std::vector<IterationRecord>& trace() const { return trace_; }
  const MasterSolution& master() const { return master_; }
  double last_max_reduced_cost() const { return last_max_rc_; }
  const std::vector<EdgePricingData>& pricing_data() const { return data_; }
  const ConstraintSystem& constraints() const { return cs_; }

 private:
  std::vector<Candidate> price_all_serial(const Duals& duals, TieRule rule) const;
  void solve_master(int columns_added, double pricing_ms, std::uint64_t tx, std::uint64_t rx);

  const Graph& graph_;
  ConstraintSystem cs_;
  std::vector<EdgePricingData> data_;
  DwConfig cfg_;
  Pricer* pricer_ = nullptr;

  std::vector<Column> pool_;
  std::set<ColumnKey> pool_keys_;
  Duals duals_;
  MasterSolution master_;
  std::vector<IterationRecord> trace_;
  bool initialized_ = false;
  bool master_solved_ = false;
  bool converged_ = false;
  int iterations_ = 0;
  double last_max_rc_ = 0.0;
};

}  // namespace dwmap
