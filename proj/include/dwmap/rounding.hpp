#pragma once

#include <cstdint>
#include <vector>

#include "dwmap/decomposition.hpp"
#include "dwmap/model.hpp"
#include "dwmap/side_constraints.hpp"

namespace dwmap {

// Surviving states S_s = { i : x_s^i > eps } per node, from a recovered
// fractional solution.
struct SurvivingStates {
  std::vector<std::vector<int>> states;  // per node, ascending
  std::vector<char> fractional;          // |S_s| > 1
  std::vector<int> argmax;               // per-node argmax of the marginal
  double fraction_fractional = 0.0;

  int num_fractional() const {
    int n = 0;
    for (char f : fractional) n += f;
    return n;
  }
};

// Throws if some node has an empty surviving set (eps too large).
SurvivingStates fractional_nodes(const FractionalSolution& sol, double eps = 1e-6);

struct RoundResult {
  Assignment assignment;
  double value = 0.0;
  bool exact = true;  // false when the search cap forced the argmax fallback
};

// Restricted integer program over the surviving states, solved by exhaustive
// branch-and-bound with an admissible bound. Honors side constraints. When
// the restricted space exceeds cap, falls back to the per-node argmax
// (exact = false). Throws UnsatisfiableError when side constraints exclude
// every restricted assignment.
RoundResult round_ip(const Graph& g, const SurvivingStates& surviving,
                     const std::vector<SideConstraint>& constraints = {},
                     std::uint64_t cap = 10'000'000);

}  // namespace dwmap
