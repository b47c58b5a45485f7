#include "dwmap/relaxation.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dwmap {

std::vector<int> Marginalizer::row_support(const Graph& g, int state) const {
  const Edge& ed = g.edge(edge);
  const int cs = g.cardinality(ed.s);
  const int ct = g.cardinality(ed.t);
  std::vector<int> out;
  if (end == Endpoint::S) {
    out.reserve(ct);
    for (int j = 0; j < ct; ++j) out.push_back(flat_index(state, j, ct));
  } else {
    out.reserve(cs);
    for (int i = 0; i < cs; ++i) out.push_back(flat_index(i, state, ct));
  }
  return out;
}

std::vector<double> marginalize(std::span<const double> y, int card_s, int card_t,
                                Endpoint which) {
  if (static_cast<int>(y.size()) != card_s * card_t) {
    throw std::invalid_argument("edge variable length mismatch: got " +
                                std::to_string(y.size()) + ", expected " +
                                std::to_string(card_s * card_t));
  }
  if (which == Endpoint::S) {
    std::vector<double> out(static_cast<std::size_t>(card_s), 0.0);
    for (int i = 0; i < card_s; ++i) {
      for (int j = 0; j < card_t; ++j) out[i] += y[flat_index(i, j, card_t)];
    }
    return out;
  }
  std::vector<double> out(static_cast<std::size_t>(card_t), 0.0);
  for (int i = 0; i < card_s; ++i) {
    for (int j = 0; j < card_t; ++j) out[j] += y[flat_index(i, j, card_t)];
  }
  return out;
}

std::vector<double> marginalize(const Graph& g, EdgeId e, Endpoint which,
                                std::span<const double> y) {
  const Edge& ed = g.edge(e);
  return marginalize(y, g.cardinality(ed.s), g.cardinality(ed.t), which);
}

int ConstraintSystem::append_row(ConstraintRow row) {
  const int id = num_rows();
  for (const SparseBlock& b : row.blocks) {
    if (b.edge < 0 || b.edge >= num_edges()) {
      throw std::invalid_argument("constraint row references unknown edge " +
                                  std::to_string(b.edge));
    }
    edge_blocks_[b.edge].push_back({id, b.entries});
  }
  if (row.kind == RowKind::Consistency) ++num_consistency_;
  rows_.push_back(std::move(row));
  return id;
}

ConstraintSystem build_consistency_rows(const Graph& g) {
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (g.degree(s) == 0) {
      throw std::invalid_argument("isolated node " + std::to_string(s) +
                                  "; split it off before building constraints");
    }
  }
  ConstraintSystem cs(g.num_edges());
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    const std::vector<EdgeId>& inc = g.incident_edges(s);
    if (inc.size() < 2) continue;
    const EdgeId ref = inc[0];
    const Marginalizer m_ref{ref, g.edge(ref).s == s ? Endpoint::S : Endpoint::T};
    for (std::size_t m = 1; m < inc.size(); ++m) {
      const EdgeId other = inc[m];
      const Marginalizer m_other{other, g.edge(other).s == s ? Endpoint::S : Endpoint::T};
      for (int i = 0; i < g.cardinality(s); ++i) {
        ConstraintRow row;
        row.kind = RowKind::Consistency;
        row.sense = Sense::EQ;
        row.rhs = 0.0;
        SparseBlock plus{ref, {}};
        for (int k : m_ref.row_support(g, i)) plus.entries.push_back({k, 1.0});
        SparseBlock minus{other, {}};
        for (int k : m_other.row_support(g, i)) minus.entries.push_back({k, -1.0});
        if (ref < other) {
          row.blocks = {std::move(plus), std::move(minus)};
        } else {
          row.blocks = {std::move(minus), std::move(plus)};
        }
        cs.append_row(std::move(row));
      }
    }
  }
  return cs;
}

EdgeVarLayout edge_var_layout(const Graph& g) {
  EdgeVarLayout out;
  out.offset.resize(g.num_edges());
  int at = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    out.offset[e] = at;
    at += g.edge_var_count(e);
  }
  out.total = at;
  return out;
}

DenseLP assemble_full_lp(const Graph& g, const ConstraintSystem& cs,
                         const std::vector<EdgeCost>& costs, std::size_t var_cap) {
  if (static_cast<int>(costs.size()) != g.num_edges()) {
    throw std::invalid_argument("need exactly one cost per edge");
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (costs[e].edge != e ||
        static_cast<int>(costs[e].values.size()) != g.edge_var_count(e)) {
      throw std::invalid_argument("missing or mismatched cost for edge " + std::to_string(e));
    }
  }
  const EdgeVarLayout layout = edge_var_layout(g);
  if (static_cast<std::size_t>(layout.total) > var_cap) {
    throw std::length_error("full LP would have " + std::to_string(layout.total) +
                            " variables, above the cap of " + std::to_string(var_cap));
  }

  DenseLP lp;
  lp.objective.assign(static_cast<std::size_t>(layout.total), 0.0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    std::copy(costs[e].values.begin(), costs[e].values.end(),
              lp.objective.begin() + layout.offset[e]);
  }
  lp.lower.assign(static_cast<std::size_t>(layout.total), 0.0);
  lp.upper.assign(static_cast<std::size_t>(layout.total), 1.0);

  auto densify = [&](const ConstraintRow& row, double sign) {
    std::vector<double> dense(static_cast<std::size_t>(layout.total), 0.0);
    for (const SparseBlock& b : row.blocks) {
      for (const auto& [k, coeff] : b.entries) dense[layout.offset[b.edge] + k] = sign * coeff;
    }
    return dense;
  };

  for (const ConstraintRow& row : cs.rows()) {
    switch (row.sense) {
      case Sense::EQ:
        lp.eq_rows.push_back(densify(row, 1.0));
        lp.eq_rhs.push_back(row.rhs);
        break;
      case Sense::LE:
        lp.le_rows.push_back(densify(row, 1.0));
        lp.le_rhs.push_back(row.rhs);
        break;
      case Sense::GE:
        lp.le_rows.push_back(densify(row, -1.0));
        lp.le_rhs.push_back(-row.rhs);
        break;
    }
  }
  // One normalization sum_k y_st^k = 1 per edge.
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    std::vector<double> dense(static_cast<std::size_t>(layout.total), 0.0);
    for (int k = 0; k < g.edge_var_count(e); ++k) dense[layout.offset[e] + k] = 1.0;
    lp.eq_rows.push_back(std::move(dense));
    lp.eq_rhs.push_back(1.0);
  }
  return lp;
}

}  // namespace dwmap
