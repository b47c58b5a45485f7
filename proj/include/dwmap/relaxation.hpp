#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dwmap/model.hpp"

namespace dwmap {

enum class Endpoint { S, T };

// The 0/1 map A_st summing an edge variable down to one endpoint's state
// distribution. Kept implicit; row_support enumerates the ones of row i.
struct Marginalizer {
  EdgeId edge = -1;
  Endpoint end = Endpoint::S;

  // Flat y-indices whose coefficient is 1 in row `state`.
  std::vector<int> row_support(const Graph& g, int state) const;
};

// Sum a row-major edge variable down to one endpoint. Preserves total mass.
std::vector<double> marginalize(std::span<const double> y, int card_s, int card_t, Endpoint which);
std::vector<double> marginalize(const Graph& g, EdgeId e, Endpoint which, std::span<const double> y);

enum class RowKind { Consistency, Side };
enum class Sense { LE, EQ, GE };

// Coefficients of one global row restricted to one edge's variables.
struct SparseBlock {
  EdgeId edge = -1;
  std::vector<std::pair<int, double>> entries;  // (flat y-index, coefficient)
};

struct ConstraintRow {
  RowKind kind = RowKind::Consistency;
  Sense sense = Sense::EQ;
  double rhs = 0.0;
  std::vector<SparseBlock> blocks;  // ascending edge id
};

// One row of B_st: the global row id plus its coefficients on this edge.
struct EdgeBlockRow {
  int row = -1;
  std::vector<std::pair<int, double>> entries;
};

// Global row index of consistency (and optional side) constraints together
// with the per-edge coefficient blocks B_st used by pricing.
class ConstraintSystem {
 public:
  ConstraintSystem() = default;
  explicit ConstraintSystem(int num_edges) : edge_blocks_(static_cast<std::size_t>(num_edges)) {}

  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_edges() const { return static_cast<int>(edge_blocks_.size()); }
  int num_consistency_rows() const { return num_consistency_; }
  const std::vector<ConstraintRow>& rows() const { return rows_; }
  const ConstraintRow& row(int r) const { return rows_[static_cast<std::size_t>(r)]; }

  // Rows of B_st touching edge e, ascending by row id.
  const std::vector<EdgeBlockRow>& edge_block(EdgeId e) const {
    return edge_blocks_[static_cast<std::size_t>(e)];
  }

  // Appends a row and updates the per-edge blocks. Returns the row id.
  int append_row(ConstraintRow row);

 private:
  std::vector<ConstraintRow> rows_;
  std::vector<std::vector<EdgeBlockRow>> edge_blocks_;
  int num_consistency_ = 0;
};

// Consistency rows in reference-edge form: for each node s with incident
// edges e_1 < ... < e_d (d >= 2), emit M_s(y_{e_1}) - M_s(y_{e_m}) = 0 for
// m = 2..d. Total row count is sum over nodes of (deg-1)*|X_s|. Throws on
// isolated nodes.
ConstraintSystem build_consistency_rows(const Graph& g);

// Full LP in dense form for the direct-solve path. Objective is maximized;
// all inequalities are <=.
struct DenseLP {
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> le_rows;
  std::vector<double> le_rhs;
  std::vector<double> lower;
  std::vector<double> upper;  // may be +inf

  int num_vars() const { return static_cast<int>(objective.size()); }
};

// Start offset of each edge's y block in the concatenated variable vector.
struct EdgeVarLayout {
  std::vector<int> offset;
  int total = 0;
};
EdgeVarLayout edge_var_layout(const Graph& g);

// Assembles the edge-variable LP: objective = concatenated c_st, equalities
// = consistency (and side equality) rows plus one normalization sum_k y = 1
// per edge, bounds [0, 1]. Refuses instances above var_cap variables.
DenseLP assemble_full_lp(const Graph& g, const ConstraintSystem& cs,
                         const std::vector<EdgeCost>& costs,
                         std::size_t var_cap = 2'000'000);

}  // namespace dwmap
