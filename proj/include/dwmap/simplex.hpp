#pragma once

#include <string>
#include <vector>

#include "dwmap/column.hpp"
#include "dwmap/relaxation.hpp"

namespace dwmap {

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalError };
std::string to_string(LPStatus s);

enum class PivotRule { Dantzig, Bland };

struct SimplexOptions {
  double tol = 1e-9;              // reduced costs and row residuals
  PivotRule pivot = PivotRule::Dantzig;
  int bland_after_degenerate = 50;
  int max_iterations = 200000;
  int refactor_every = 100;       // pivots between dense refactorizations
};

struct LPSolution {
  LPStatus status = LPStatus::NumericalError;
  std::vector<double> primal;  // structural variables
  std::vector<double> duals;   // one per row: equality rows first, then <= rows
  double objective = 0.0;
  std::vector<int> basis;      // internal column ids; structural ids are < num_vars
  int iterations = 0;
};

// Primal revised simplex, two-phase, bounded variables, maximization.
// Numerical breakdown is reported as LPStatus::NumericalError, never as a
// wrong "optimal". Deterministic for fixed options.
LPSolution solve_lp(const DenseLP& lp, const SimplexOptions& opts = {});

// Restricted master program over convexity variables alpha: one variable per
// pooled column, the constraint-system rows evaluated through each column's
// G vector, plus one convexity row sum(alpha) = 1 per edge, alpha >= 0.
struct MasterSolution {
  LPStatus status = LPStatus::NumericalError;
  double objective = 0.0;
  std::vector<double> alpha;  // per pool column
  std::vector<double> pi;     // per constraint-system row
  std::vector<double> gamma;  // per edge (convexity-row duals)
  std::vector<char> basic;    // per pool column: in the final basis
  int iterations = 0;
};

// Throws std::invalid_argument if some edge has no column (the convexity row
// would be unsatisfiable).
MasterSolution solve_restricted_master(const std::vector<Column>& pool,
                                       const ConstraintSystem& cs,
                                       const SimplexOptions& opts = {});

}  // namespace dwmap
