#include "dwmap/simplex.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace dwmap {

std::string to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
    case LPStatus::IterationLimit: return "iteration-limit";
    case LPStatus::NumericalError: return "numerical-error";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

enum class LoopOutcome { Optimal, Unbounded, IterationLimit, Numerical };

// Dense bounded-variable primal simplex working set. Columns are laid out as
// structural variables, then slacks of the <= rows, then phase-1 artificials.
// The basis inverse is kept explicitly and refactorized every
// opts.refactor_every pivots.
class SimplexCore {
 public:
  SimplexCore(const DenseLP& lp, const SimplexOptions& opts) : opts_(opts) {
    n_struct_ = lp.num_vars();
    const int me = static_cast<int>(lp.eq_rows.size());
    const int mf = static_cast<int>(lp.le_rows.size());
    m_ = me + mf;
    n_slack_ = mf;

    for (int r = 0; r < me; ++r) {
      if (static_cast<int>(lp.eq_rows[r].size()) != n_struct_)
        throw std::invalid_argument("equality row length mismatch");
    }
    for (int r = 0; r < mf; ++r) {
      if (static_cast<int>(lp.le_rows[r].size()) != n_struct_)
        throw std::invalid_argument("inequality row length mismatch");
    }
    if (static_cast<int>(lp.eq_rhs.size()) != me || static_cast<int>(lp.le_rhs.size()) != mf)
      throw std::invalid_argument("rhs length mismatch");
    if (static_cast<int>(lp.lower.size()) != n_struct_ ||
        static_cast<int>(lp.upper.size()) != n_struct_)
      throw std::invalid_argument("bound vector length mismatch");

    A_.setZero(m_, n_struct_ + n_slack_);
    b_.resize(m_);
    for (int r = 0; r < me; ++r) {
      for (int j = 0; j < n_struct_; ++j) A_(r, j) = lp.eq_rows[r][j];
      b_(r) = lp.eq_rhs[r];
    }
    for (int r = 0; r < mf; ++r) {
      for (int j = 0; j < n_struct_; ++j) A_(me + r, j) = lp.le_rows[r][j];
      A_(me + r, n_struct_ + r) = 1.0;  // slack
      b_(me + r) = lp.le_rhs[r];
    }
    for (int r = 0; r < m_; ++r) {
      if (!std::isfinite(b_(r))) throw std::invalid_argument("non-finite rhs");
    }

    lo_.assign(n_struct_ + n_slack_, 0.0);
    hi_.assign(n_struct_ + n_slack_, kInf);
    for (int j = 0; j < n_struct_; ++j) {
      lo_[j] = lp.lower[j];
      hi_[j] = lp.upper[j];
      if (std::isnan(lo_[j]) || std::isnan(hi_[j]) || lo_[j] > hi_[j])
        throw std::invalid_argument("invalid bounds at variable " + std::to_string(j));
      if (!std::isfinite(lp.objective[j]))
        throw std::invalid_argument("non-finite objective coefficient");
    }
    obj_ = lp.objective;
    b_scale_ = 1.0 + (m_ > 0 ? b_.lpNorm<Eigen::Infinity>() : 0.0);
  }

  LPSolution solve() {
    LPSolution sol;
    place_nonbasic_at_bounds();
    build_initial_basis();

    if (n_art_ > 0) {
      phase1_ = true;
      set_phase1_costs();
      if (!refactor()) return numerical(sol);
      const LoopOutcome out = run_primal();
      if (out == LoopOutcome::IterationLimit) return finish(sol, LPStatus::IterationLimit);
      if (out != LoopOutcome::Optimal) return numerical(sol);
      double infeas = 0.0;
      for (int j = art_begin(); j < ncols(); ++j) infeas += xval_[j];
      if (infeas > opts_.tol * b_scale_) return finish(sol, LPStatus::Infeasible);
      if (!drive_out_artificials()) return numerical(sol);
      pin_artificials();
      phase1_ = false;
    }

    set_phase2_costs();
    if (!refactor()) return numerical(sol);
    for (int attempt = 0; attempt < 3; ++attempt) {
      const LoopOutcome out = run_primal();
      switch (out) {
        case LoopOutcome::Unbounded: return finish(sol, LPStatus::Unbounded);
        case LoopOutcome::IterationLimit: return finish(sol, LPStatus::IterationLimit);
        case LoopOutcome::Numerical: return numerical(sol);
        case LoopOutcome::Optimal: break;
      }
      // Re-derive basic values from a fresh factorization; if the repaired
      // point still prices out optimal and verifies, we are done. Never
      // report a wrong "optimal".
      if (!refactor()) return numerical(sol);
      if (verify_optimal()) return finish(sol, LPStatus::Optimal);
    }
    return numerical(sol);
  }

 private:
  int ncols() const { return static_cast<int>(lo_.size()); }
  int art_begin() const { return n_struct_ + n_slack_; }

  void place_nonbasic_at_bounds() {
    state_.assign(static_cast<std::size_t>(ncols()), VarState::AtLower);
    xval_.assign(static_cast<std::size_t>(ncols()), 0.0);
    for (int j = 0; j < ncols(); ++j) {
      if (lo_[j] > -kInf) {
        state_[j] = VarState::AtLower;
        xval_[j] = lo_[j];
      } else if (hi_[j] < kInf) {
        state_[j] = VarState::AtUpper;
        xval_[j] = hi_[j];
      } else {
        state_[j] = VarState::FreeZero;
        xval_[j] = 0.0;
      }
    }
  }

  // Slack columns cover <= rows with nonnegative residual; every other row
  // gets a signed artificial so the initial basis is feasible by
  // construction.
  void build_initial_basis() {
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xval_.data(), ncols());
    Eigen::VectorXd r = b_ - A_ * x;
    basis_.assign(static_cast<std::size_t>(m_), -1);
    const int me = m_ - n_slack_;
    std::vector<int> art_rows;
    for (int row = 0; row < m_; ++row) {
      if (row >= me && r(row) >= 0.0) {
        const int slack = n_struct_ + (row - me);
        basis_[row] = slack;
        state_[slack] = VarState::Basic;
        xval_[slack] = r(row);
      } else {
        art_rows.push_back(row);
      }
    }
    n_art_ = static_cast<int>(art_rows.size());
    if (n_art_ > 0) {
      A_.conservativeResize(Eigen::NoChange, art_begin() + n_art_);
      A_.rightCols(n_art_).setZero();
      for (int a = 0; a < n_art_; ++a) {
        const int row = art_rows[a];
        const int col = art_begin() + a;
        A_(row, col) = r(row) >= 0.0 ? 1.0 : -1.0;
        lo_.push_back(0.0);
        hi_.push_back(kInf);
        basis_[row] = col;
        state_.push_back(VarState::Basic);
        xval_.push_back(std::abs(r(row)));
      }
    }
  }

  void set_phase1_costs() {
    cost_.assign(static_cast<std::size_t>(ncols()), 0.0);
    for (int j = art_begin(); j < ncols(); ++j) cost_[j] = -1.0;  // maximize -sum z
  }

  void set_phase2_costs() {
    cost_.assign(static_cast<std::size_t>(ncols()), 0.0);
    for (int j = 0; j < n_struct_; ++j) cost_[j] = obj_[j];
  }

  void pin_artificials() {
    for (int j = art_begin(); j < ncols(); ++j) {
      hi_[j] = 0.0;
      xval_[j] = 0.0;
      if (state_[j] != VarState::Basic) state_[j] = VarState::AtLower;
    }
  }

  // Pivot nonbasic non-artificial columns into rows still held by basic
  // artificials. Rows with no eligible column are linearly dependent; their
  // artificial stays basic, pinned at zero.
  bool drive_out_artificials() {
    for (int p = 0; p < m_; ++p) {
      if (basis_[p] < art_begin()) continue;
      if (std::abs(xval_[basis_[p]]) > opts_.tol * b_scale_) return false;
      Eigen::RowVectorXd row = Binv_.row(p) * A_.leftCols(art_begin());
      int enter = -1;
      for (int j = 0; j < art_begin(); ++j) {
        if (state_[j] == VarState::Basic) continue;
        if (std::abs(row(j)) > 1e-9) {
          enter = j;
          break;
        }
      }
      if (enter < 0) continue;  // dependent row
      const Eigen::VectorXd w = Binv_ * A_.col(enter);
      const int old = basis_[p];
      state_[enter] = VarState::Basic;  // swap at step 0; values unchanged
      state_[old] = VarState::AtLower;
      xval_[old] = 0.0;
      basis_[p] = enter;
      if (!update_binv(w, p)) return false;
    }
    return true;
  }

  bool refactor() {
    Eigen::MatrixXd B(m_, m_);
    for (int p = 0; p < m_; ++p) B.col(p) = A_.col(basis_[p]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (m_ > 0 && !lu.isInvertible()) return false;
    Binv_ = lu.inverse();
    pivots_since_refactor_ = 0;
    recompute_basic_values();
    return true;
  }

  void recompute_basic_values() {
    Eigen::VectorXd xn = Eigen::VectorXd::Zero(ncols());
    for (int j = 0; j < ncols(); ++j) {
      if (state_[j] != VarState::Basic) xn(j) = xval_[j];
    }
    const Eigen::VectorXd xb = Binv_ * (b_ - A_ * xn);
    for (int p = 0; p < m_; ++p) xval_[basis_[p]] = xb(p);
  }

  bool update_binv(const Eigen::VectorXd& w, int p) {
    const double piv = w(p);
    if (std::abs(piv) < 1e-12) return false;
    const Eigen::RowVectorXd row_p = Binv_.row(p) / piv;
    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      Binv_.row(i) -= w(i) * row_p;
    }
    Binv_.row(p) = row_p;
    ++pivots_since_refactor_;
    return true;
  }

  Eigen::VectorXd dual_values() const {
    Eigen::VectorXd cb(m_);
    for (int p = 0; p < m_; ++p) cb(p) = cost_[basis_[p]];
    return Binv_.transpose() * cb;
  }

  LoopOutcome run_primal() {
    bool bland = (opts_.pivot == PivotRule::Bland);
    int degen_streak = 0;
    while (true) {
      if (iterations_ >= opts_.max_iterations) return LoopOutcome::IterationLimit;
      if (pivots_since_refactor_ >= opts_.refactor_every) {
        if (!refactor()) return LoopOutcome::Numerical;
      }
      const Eigen::VectorXd y = dual_values();

      int enter = -1;
      double best = opts_.tol;
      double enter_d = 0.0;
      for (int j = 0; j < ncols(); ++j) {
        if (state_[j] == VarState::Basic || lo_[j] == hi_[j]) continue;
        const double d = cost_[j] - y.dot(A_.col(j));
        double viol = 0.0;
        switch (state_[j]) {
          case VarState::AtLower: viol = d; break;
          case VarState::AtUpper: viol = -d; break;
          case VarState::FreeZero: viol = std::abs(d); break;
          case VarState::Basic: break;
        }
        if (viol > best) {
          enter = j;
          enter_d = d;
          best = viol;
          if (bland) break;  // lowest eligible index
        }
      }
      if (enter < 0) return LoopOutcome::Optimal;

      const int dir = (state_[enter] == VarState::AtUpper ||
                       (state_[enter] == VarState::FreeZero && enter_d < 0.0))
                          ? -1
                          : 1;
      const Eigen::VectorXd w = Binv_ * A_.col(enter);

      // Ratio test over basic variables; the entering variable's own
      // opposite bound allows a bound flip with no basis change.
      const double own_range =
          (lo_[enter] > -kInf && hi_[enter] < kInf) ? hi_[enter] - lo_[enter] : kInf;
      double t_min = kInf;
      int leave_pos = -1;
      int leave_to = 0;  // 0: lower bound, 1: upper bound
      auto consider = [&](int p, double t, int to) {
        if (leave_pos < 0 || t < t_min - 1e-12) {
          t_min = t;
          leave_pos = p;
          leave_to = to;
          return;
        }
        if (t <= t_min + 1e-12) {
          // Tie: Bland takes the lowest leaving column id; otherwise prefer
          // the largest pivot magnitude for stability.
          const bool take = bland ? basis_[p] < basis_[leave_pos]
                                  : std::abs(w(p)) > std::abs(w(leave_pos));
          if (take) {
            t_min = std::min(t_min, t);
            leave_pos = p;
            leave_to = to;
          }
        }
      };
      for (int p = 0; p < m_; ++p) {
        const double delta = dir * w(p);  // basic p moves by -t*delta
        const int jb = basis_[p];
        if (delta > 1e-10) {
          if (lo_[jb] > -kInf) consider(p, std::max(0.0, (xval_[jb] - lo_[jb]) / delta), 0);
        } else if (delta < -1e-10) {
          if (hi_[jb] < kInf) consider(p, std::max(0.0, (hi_[jb] - xval_[jb]) / (-delta)), 1);
        }
      }

      if (own_range <= t_min) {
        if (own_range == kInf) {
          return phase1_ ? LoopOutcome::Numerical : LoopOutcome::Unbounded;
        }
        const double t = own_range;  // bound flip
        for (int p = 0; p < m_; ++p) xval_[basis_[p]] -= t * dir * w(p);
        if (dir > 0) {
          state_[enter] = VarState::AtUpper;
          xval_[enter] = hi_[enter];
        } else {
          state_[enter] = VarState::AtLower;
          xval_[enter] = lo_[enter];
        }
        ++iterations_;
        degen_streak = 0;
        bland = (opts_.pivot == PivotRule::Bland);
        continue;
      }

      const double t = t_min;
      const int leave = basis_[leave_pos];
      for (int p = 0; p < m_; ++p) xval_[basis_[p]] -= t * dir * w(p);
      xval_[enter] = (state_[enter] == VarState::FreeZero ? 0.0 : xval_[enter]) + dir * t;
      state_[enter] = VarState::Basic;
      state_[leave] = (leave_to == 0) ? VarState::AtLower : VarState::AtUpper;
      xval_[leave] = (leave_to == 0) ? lo_[leave] : hi_[leave];
      basis_[leave_pos] = enter;
      if (!update_binv(w, leave_pos)) return LoopOutcome::Numerical;
      ++iterations_;

      if (t <= opts_.tol) {
        if (++degen_streak >= opts_.bland_after_degenerate) bland = true;
      } else {
        degen_streak = 0;
        bland = (opts_.pivot == PivotRule::Bland);
      }
    }
  }

  bool verify_optimal() const {
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xval_.data(), ncols());
    if (m_ > 0) {
      const double resid = (A_ * x - b_).lpNorm<Eigen::Infinity>();
      if (resid > 1e-7 * b_scale_) return false;
    }
    for (int j = 0; j < ncols(); ++j) {
      const double bt = 1e-7 * (1.0 + std::abs(xval_[j]));
      if (xval_[j] < lo_[j] - bt || xval_[j] > hi_[j] + bt) return false;
    }
    const double primal = objective_value();
    const double dual = dual_objective_value();
    return std::abs(primal - dual) <= 1e-7 * (1.0 + std::abs(primal));
  }

  double objective_value() const {
    double v = 0.0;
    for (int j = 0; j < n_struct_; ++j) v += obj_[j] * xval_[j];
    return v;
  }

  double dual_objective_value() const {
    const Eigen::VectorXd y = dual_values();
    double v = m_ > 0 ? y.dot(b_) : 0.0;
    for (int j = 0; j < ncols(); ++j) {
      if (state_[j] == VarState::Basic || state_[j] == VarState::FreeZero) continue;
      const double d = cost_[j] - y.dot(A_.col(j));
      v += d * xval_[j];
    }
    return v;
  }

  LPSolution finish(LPSolution& sol, LPStatus status) {
    sol.status = status;
    sol.iterations = iterations_;
    sol.primal.assign(xval_.begin(), xval_.begin() + n_struct_);
    sol.basis = basis_;
    if (!cost_.empty() && Binv_.rows() == m_) {
      const Eigen::VectorXd y = dual_values();
      sol.duals.assign(y.data(), y.data() + m_);
    }
    sol.objective = (status == LPStatus::Optimal || status == LPStatus::IterationLimit)
                        ? objective_value()
                        : 0.0;
    return sol;
  }

  LPSolution numerical(LPSolution& sol) { return finish(sol, LPStatus::NumericalError); }

  const SimplexOptions opts_;
  int m_ = 0;
  int n_struct_ = 0;
  int n_slack_ = 0;
  int n_art_ = 0;
  bool phase1_ = false;
  double b_scale_ = 1.0;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  std::vector<double> lo_, hi_;
  std::vector<double> obj_;
  std::vector<double> cost_;
  std::vector<VarState> state_;
  std::vector<double> xval_;
  std::vector<int> basis_;
  Eigen::MatrixXd Binv_;
  int pivots_since_refactor_ = 0;
  int iterations_ = 0;
};

}  // namespace

LPSolution solve_lp(const DenseLP& lp, const SimplexOptions& opts) {
  if (lp.num_vars() == 0 && lp.eq_rows.empty() && lp.le_rows.empty()) {
    LPSolution sol;
    sol.status = LPStatus::Optimal;
    return sol;
  }
  SimplexCore core(lp, opts);
  return core.solve();
}

MasterSolution solve_restricted_master(const std::vector<Column>& pool,
                                       const ConstraintSystem& cs,
                                       const SimplexOptions& opts) {
  const int num_edges = cs.num_edges();
  const int n = static_cast<int>(pool.size());
  std::vector<int> per_edge(static_cast<std::size_t>(num_edges), 0);
  for (const Column& c : pool) {
    if (c.edge < 0 || c.edge >= num_edges) throw std::invalid_argument("column with unknown edge");
    ++per_edge[c.edge];
  }
  for (int e = 0; e < num_edges; ++e) {
    if (per_edge[e] == 0) {
      throw std::invalid_argument("edge " + std::to_string(e) +
                                  " has no columns; master would be infeasible");
    }
  }

  // Map constraint-system rows into the dense LP (GE rows are negated into
  // <=; remember the sign to map duals back).
  struct RowSlot {
    bool eq;
    int idx;
    double sign;
  };
  std::vector<RowSlot> slot(cs.rows().size());
  int n_eq = 0, n_le = 0;
  for (std::size_t r = 0; r < cs.rows().size(); ++r) {
    switch (cs.row(static_cast<int>(r)).sense) {
      case Sense::EQ: slot[r] = {true, n_eq++, 1.0}; break;
      case Sense::LE: slot[r] = {false, n_le++, 1.0}; break;
      case Sense::GE: slot[r] = {false, n_le++, -1.0}; break;
    }
  }
  const int conv_base = n_eq;  // convexity rows follow the cs equality rows

  DenseLP lp;
  lp.objective.resize(n);
  lp.lower.assign(n, 0.0);
  lp.upper.assign(n, std::numeric_limits<double>::infinity());
  lp.eq_rows.assign(n_eq + num_edges, std::vector<double>(n, 0.0));
  lp.eq_rhs.assign(n_eq + num_edges, 0.0);
  lp.le_rows.assign(n_le, std::vector<double>(n, 0.0));
  lp.le_rhs.assign(n_le, 0.0);
  for (std::size_t r = 0; r < cs.rows().size(); ++r) {
    const ConstraintRow& row = cs.row(static_cast<int>(r));
    if (slot[r].eq) {
      lp.eq_rhs[slot[r].idx] = row.rhs;
    } else {
      lp.le_rhs[slot[r].idx] = slot[r].sign * row.rhs;
    }
  }
  for (int v = 0; v < n; ++v) {
    const Column& c = pool[v];
    lp.objective[v] = c.cost;
    for (const auto& [r, coeff] : c.constraint_column) {
      const RowSlot& s = slot[static_cast<std::size_t>(r)];
      if (s.eq) {
        lp.eq_rows[s.idx][v] = coeff;
      } else {
        lp.le_rows[s.idx][v] = s.sign * coeff;
      }
    }
    lp.eq_rows[conv_base + c.edge][v] = 1.0;
  }
  for (int e = 0; e < num_edges; ++e) lp.eq_rhs[conv_base + e] = 1.0;

  const LPSolution sol = solve_lp(lp, opts);
  MasterSolution out;
  out.status = sol.status;
  out.objective = sol.objective;
  out.iterations = sol.iterations;
  out.alpha = sol.primal;
  out.basic.assign(static_cast<std::size_t>(n), 0);
  for (int col : sol.basis) {
    if (col >= 0 && col < n) out.basic[col] = 1;
  }
  if (!sol.duals.empty()) {
    out.pi.assign(cs.rows().size(), 0.0);
    out.gamma.assign(static_cast<std::size_t>(num_edges), 0.0);
    for (std::size_t r = 0; r < cs.rows().size(); ++r) {
      const RowSlot& s = slot[r];
      const int pos = s.eq ? s.idx : n_eq + num_edges + s.idx;
      out.pi[r] = s.sign * sol.duals[pos];
    }
    for (int e = 0; e < num_edges; ++e) out.gamma[e] = sol.duals[conv_base + e];
  }
  return out;
}

}  // namespace dwmap
