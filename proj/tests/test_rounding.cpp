#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dwmap/baselines.hpp"
#include "dwmap/rounding.hpp"
#include "dwmap/simplex.hpp"
#include "test_util.hpp"

using namespace dwmap;
using testutil::Rng;

namespace {

FractionalSolution fake_solution(std::vector<std::vector<double>> marginals) {
  FractionalSolution sol;
  sol.node_marginals = std::move(marginals);
  return sol;
}

// Test-local enumeration over a restricted state space, independent of the
// branch-and-bound path.
double enumerate_restricted(const Graph& g, const SurvivingStates& surviving,
                            const std::vector<SideConstraint>& sc, bool* found) {
  std::vector<int> states(g.num_nodes(), 0);
  std::vector<std::size_t> pick(g.num_nodes(), 0);
  double best = -std::numeric_limits<double>::infinity();
  *found = false;
  while (true) {
    for (NodeId s = 0; s < g.num_nodes(); ++s) states[s] = surviving.states[s][pick[s]];
    if (testutil::oracle_feasible(g, states, sc)) {
      const double v = testutil::oracle_objective(g, states);
      if (!*found || v > best) best = v;
      *found = true;
    }
    int s = g.num_nodes() - 1;
    while (s >= 0) {
      if (++pick[s] < surviving.states[s].size()) break;
      pick[s] = 0;
      --s;
    }
    if (s < 0) break;
  }
  return best;
}

}  // namespace

TEST_CASE("fractional_nodes separates fixed from fractional") {
  const auto sol = fake_solution({{1.0, 0.0}, {0.5, 0.5}, {1.0 - 1e-9, 1e-9}});
  const SurvivingStates s = fractional_nodes(sol, 1e-6);
  CHECK(s.states[0] == std::vector<int>{0});
  CHECK_FALSE(static_cast<bool>(s.fractional[0]));
  CHECK(s.states[1] == std::vector<int>{0, 1});
  CHECK(static_cast<bool>(s.fractional[1]));
  CHECK(s.states[2] == std::vector<int>{0});  // below threshold
  CHECK(s.num_fractional() == 1);
  CHECK(s.fraction_fractional == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("an all-below-eps marginal is reported as an error") {
  const auto sol = fake_solution({{1e-9, 1e-9}});
  CHECK_THROWS_AS(fractional_nodes(sol, 1e-6), std::runtime_error);
}

TEST_CASE("the frustrated triangle rounds to the integer optimum") {
  const Graph g = testutil::frustrated_triangle();
  SurvivingStates surviving;
  surviving.states = {{0, 1}, {0, 1}, {0, 1}};
  surviving.fractional = {1, 1, 1};
  surviving.argmax = {0, 0, 0};
  const RoundResult r = round_ip(g, surviving);
  CHECK(r.exact);
  CHECK(r.value == doctest::Approx(2.0));
  CHECK(map_objective(g, r.assignment) == doctest::Approx(2.0));
}

TEST_CASE("fully fixed nodes pass through unchanged") {
  const Graph g({2, 2}, {{0, 1}}, {{1, 0}, {0, 2}}, {{0, 0, 0, 0}});
  SurvivingStates surviving;
  surviving.states = {{0}, {1}};
  surviving.fractional = {0, 0};
  surviving.argmax = {0, 1};
  const RoundResult r = round_ip(g, surviving);
  CHECK(r.assignment.states == std::vector<int>{0, 1});
  CHECK(r.value == doctest::Approx(3.0));
}

TEST_CASE("branch-and-bound equals enumeration over random restricted spaces") {
  Rng rng(10001);
  for (int trial = 0; trial < 60; ++trial) {
    const Graph g = testutil::random_connected(rng, rng.uniform_int(2, 6), 4, 0.4);
    SurvivingStates surviving;
    surviving.states.resize(g.num_nodes());
    surviving.fractional.assign(g.num_nodes(), 0);
    surviving.argmax.assign(g.num_nodes(), 0);
    for (NodeId s = 0; s < g.num_nodes(); ++s) {
      for (int i = 0; i < g.cardinality(s); ++i) {
        if (rng.uniform(0.0, 1.0) < 0.6) surviving.states[s].push_back(i);
      }
      if (surviving.states[s].empty()) {
        surviving.states[s].push_back(rng.uniform_int(0, g.cardinality(s) - 1));
      }
      surviving.fractional[s] = surviving.states[s].size() > 1;
      surviving.argmax[s] = surviving.states[s][0];
    }
    std::vector<SideConstraint> sc;
    if (trial % 3 == 0) sc.push_back(SideConstraint::injective());

    bool feasible = false;
    const double expected = enumerate_restricted(g, surviving, sc, &feasible);
    if (!feasible) {
      CHECK_THROWS_AS(round_ip(g, surviving, sc), UnsatisfiableError);
      continue;
    }
    const RoundResult r = round_ip(g, surviving, sc);
    CHECK(r.exact);
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("when every state survives, rounding reproduces brute force") {
  Rng rng(10002);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = testutil::random_connected(rng, rng.uniform_int(2, 5), 3, 0.5);
    SurvivingStates surviving;
    surviving.states.resize(g.num_nodes());
    surviving.fractional.assign(g.num_nodes(), 1);
    surviving.argmax.assign(g.num_nodes(), 0);
    for (NodeId s = 0; s < g.num_nodes(); ++s) {
      for (int i = 0; i < g.cardinality(s); ++i) surviving.states[s].push_back(i);
    }
    const RoundResult r = round_ip(g, surviving);
    CHECK(r.value == doctest::Approx(brute_force_map(g).value).epsilon(1e-12));
  }
}

TEST_CASE("the rounded value never exceeds the LP bound") {
  Rng rng(10003);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = testutil::random_connected(rng, rng.uniform_int(3, 6), 3, 0.6);
    const std::vector<EdgeCost> costs = combined_edge_costs(g);
    const ConstraintSystem cs = build_consistency_rows(g);
    DwSolver solver(g, costs, cs);
    solver.initialize();
    REQUIRE(solver.run());
    const FractionalSolution frac = solver.recover();
    const SurvivingStates surviving = fractional_nodes(frac, 1e-6);
    const RoundResult r = round_ip(g, surviving);
    CHECK(r.value <= frac.objective + 1e-7);
  }
}

TEST_CASE("the cap overflow falls back to the marginal argmax") {
  const Graph g = testutil::frustrated_triangle();
  SurvivingStates surviving;
  surviving.states = {{0, 1}, {0, 1}, {0, 1}};
  surviving.fractional = {1, 1, 1};
  surviving.argmax = {0, 1, 0};
  const RoundResult r = round_ip(g, surviving, {}, /*cap=*/2);
  CHECK_FALSE(r.exact);
  CHECK(r.assignment.states == std::vector<int>{0, 1, 0});
  CHECK(r.value == doctest::Approx(map_objective(g, r.assignment)));
}
