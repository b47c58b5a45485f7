#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dwmap/decomposition.hpp"
#include "dwmap/side_constraints.hpp"
#include "test_util.hpp"

using namespace dwmap;
using testutil::Rng;

namespace {

// Evaluates every injected row at the one-hot lift of an assignment.
bool lifted_rows_hold(const Graph& g, const ConstraintSystem& cs, const Assignment& a) {
  for (const ConstraintRow& row : cs.rows()) {
    if (row.kind != RowKind::Side) continue;
    double v = 0.0;
    for (const SparseBlock& b : row.blocks) {
      const Edge& ed = g.edge(b.edge);
      const int k = flat_index(a.states[ed.s], a.states[ed.t], g.cardinality(ed.t));
      for (const auto& [idx, coeff] : b.entries) {
        if (idx == k) v += coeff;
      }
    }
    const bool ok = (row.sense == Sense::LE && v <= row.rhs + 1e-9) ||
                    (row.sense == Sense::GE && v >= row.rhs - 1e-9) ||
                    (row.sense == Sense::EQ && std::abs(v - row.rhs) <= 1e-9);
    if (!ok) return false;
  }
  return true;
}

void for_all_assignments(const Graph& g, const std::function<void(const Assignment&)>& fn) {
  Assignment a;
  a.states.assign(g.num_nodes(), 0);
  while (true) {
    fn(a);
    int s = g.num_nodes() - 1;
    while (s >= 0) {
      if (++a.states[s] < g.cardinality(s)) break;
      a.states[s] = 0;
      --s;
    }
    if (s < 0) break;
  }
}

}  // namespace

TEST_CASE("injective expansion emits one row per non-outlier state") {
  const Graph g({2, 2}, {{0, 1}}, {{0, 0}, {0, 0}}, {{0, 0, 0, 0}});
  {
    ConstraintSystem cs = build_consistency_rows(g);
    inject(cs, {SideConstraint::injective()}, g);
    CHECK(cs.num_rows() == 2);
  }
  {
    ConstraintSystem cs = build_consistency_rows(g);
    inject(cs, {SideConstraint::injective(1)}, g);  // exempt the second state
    CHECK(cs.num_rows() == 1);
  }
  {
    ConstraintSystem cs = build_consistency_rows(g);
    inject(cs, {}, g);
    CHECK(cs.num_rows() == 0);
  }
}

TEST_CASE("two nodes sharing a designated edge accumulate coefficients") {
  const Graph g({2, 2}, {{0, 1}}, {{0, 0}, {0, 0}}, {{0, 0, 0, 0}});
  ConstraintSystem cs = build_consistency_rows(g);
  inject(cs, {SideConstraint::injective()}, g);
  // Row for state 0: x_0^0 + x_1^0 over edge variables. At the one-hot for
  // (0, 0) the value is 2, which violates the <= 1 row.
  const ConstraintRow& row = cs.row(0);
  REQUIRE(row.blocks.size() == 1);
  double at00 = 0.0;
  for (const auto& [k, coeff] : row.blocks[0].entries) {
    if (k == flat_index(0, 0, 2)) at00 += coeff;
  }
  CHECK(at00 == doctest::Approx(2.0));
}

TEST_CASE("inject is sound: lifted rows accept exactly the feasible assignments") {
  Rng rng(9001);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = testutil::random_connected(rng, rng.uniform_int(2, 5), 3, 0.5);
    std::vector<SideConstraint> sc;
    if (trial % 2 == 0) {
      sc.push_back(SideConstraint::injective(trial % 4 == 0 ? 0 : -1));
    } else {
      // Random generic row over a few (node, state) pairs.
      std::vector<LinearTerm> terms;
      const int nterms = rng.uniform_int(1, 4);
      for (int t = 0; t < nterms; ++t) {
        const NodeId node = rng.uniform_int(0, g.num_nodes() - 1);
        terms.push_back({node, rng.uniform_int(0, g.cardinality(node) - 1),
                         static_cast<double>(rng.uniform_int(-2, 2))});
      }
      const Sense sense = trial % 3 == 0 ? Sense::GE : Sense::LE;
      sc.push_back(SideConstraint::linear(std::move(terms), sense,
                                          static_cast<double>(rng.uniform_int(-1, 2))));
    }
    ConstraintSystem cs = build_consistency_rows(g);
    inject(cs, sc, g);
    for_all_assignments(g, [&](const Assignment& a) {
      CHECK(lifted_rows_hold(g, cs, a) == satisfies(g, a, sc));
    });
  }
}

TEST_CASE("inject rejects isolated nodes and invalid pairs") {
  const Graph g({2, 2, 2}, {{0, 1}}, {{0, 0}, {0, 0}, {0, 0}}, {{0, 0, 0, 0}});
  ConstraintSystem cs(g.num_edges());
  CHECK_THROWS_AS(inject(cs, {SideConstraint::injective()}, g), std::invalid_argument);
  CHECK_THROWS_AS(
      inject(cs, {SideConstraint::linear({{2, 0, 1.0}}, Sense::LE, 1.0)}, g),
      std::invalid_argument);
  CHECK_THROWS_AS(
      inject(cs, {SideConstraint::linear({{0, 5, 1.0}}, Sense::LE, 1.0)}, g),
      std::invalid_argument);
}

TEST_CASE("feasible_init resolves contention by node order") {
  // Both nodes prefer state 0; the injective constraint forces them apart.
  const Graph g({2, 2}, {{0, 1}}, {{1, 0}, {1, 0}}, {{0, 0, 0, 0}});
  const Assignment x = feasible_init(g, {SideConstraint::injective()});
  CHECK(x.states == std::vector<int>{0, 1});
  CHECK(satisfies(g, x, {SideConstraint::injective()}));
}

TEST_CASE("feasible_init without constraints reproduces the one-step initialization") {
  Rng rng(9002);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = testutil::random_connected(rng, rng.uniform_int(2, 7), 3, 0.4);
    DwSolver solver(g, combined_edge_costs(g), build_consistency_rows(g));
    const Assignment via_alg1 = solver.initialize();
    const Assignment via_feasible = feasible_init(g, {});
    CHECK(via_feasible.states == via_alg1.states);
  }
}

TEST_CASE("pigeonhole infeasibility is proven") {
  const Graph g({2, 2, 2}, {{0, 1}, {1, 2}},
                {{0, 0}, {0, 0}, {0, 0}},
                {{0, 0, 0, 0}, {0, 0, 0, 0}});
  CHECK_THROWS_AS(feasible_init(g, {SideConstraint::injective()}), UnsatisfiableError);
}

TEST_CASE("an outlier state absorbs the overflow") {
  const Graph g({2, 2, 2}, {{0, 1}, {1, 2}},
                {{0, 0}, {0, 0}, {0, 0}},
                {{0, 0, 0, 0}, {0, 0, 0, 0}});
  const std::vector<SideConstraint> sc{SideConstraint::injective(1)};
  const Assignment x = feasible_init(g, sc);
  CHECK(satisfies(g, x, sc));
}

TEST_CASE("backtracking recovers when greedy dead-ends") {
  // Nodes 1 and 2 only have states {0, 1}, so node 0 must take state 2; but
  // greedy assigns node 0 first (highest degree) and prefers state 0, which
  // the one-step lookahead cannot rule out. Greedy then strands node 2, and
  // the exhaustive fallback must find (2, 0, 1).
  const Graph g({3, 2, 2}, {{0, 1}, {0, 2}},
                {{5, 1, 0}, {1, 0}, {0, 0}},
                {std::vector<double>(6, 0.0), std::vector<double>(6, 0.0)});
  const std::vector<SideConstraint> sc{SideConstraint::injective()};
  const Assignment x = feasible_init(g, sc);
  CHECK(satisfies(g, x, sc));
  CHECK(x.states[0] == 2);
  CHECK(x.states[1] == 0);
  CHECK(x.states[2] == 1);
}

TEST_CASE("satisfies evaluates generic rows") {
  const Graph g({2, 2}, {{0, 1}}, {{0, 0}, {0, 0}}, {{0, 0, 0, 0}});
  const auto sc = SideConstraint::linear({{0, 0, 1.0}, {1, 0, 1.0}}, Sense::EQ, 1.0);
  CHECK(satisfies(g, {{0, 1}}, {sc}));
  CHECK_FALSE(satisfies(g, {{0, 0}}, {sc}));
  CHECK_FALSE(satisfies(g, {{1, 1}}, {sc}));
}
