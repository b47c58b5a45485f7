#pragma once

#include <cstdint>
#include <vector>

#include "dwmap/model.hpp"
#include "dwmap/side_constraints.hpp"

namespace dwmap {

struct BruteForceResult {
  Assignment assignment;
  double value = 0.0;
};

// Exhaustive exact MAP, honoring side constraints. Throws std::length_error
// above the state-space cap and UnsatisfiableError when the constraints
// exclude every assignment.
BruteForceResult brute_force_map(const Graph& g,
                                 const std::vector<SideConstraint>& constraints = {},
                                 std::uint64_t cap = 10'000'000);

struct MaxProductResult {
  Assignment assignment;
  bool converged = false;
  int iterations = 0;
};

// Synchronous max-product in log space with message normalization; decodes
// by max belief with lowest-index ties. Exact on trees. Non-convergence is
// reported, not an error.
MaxProductResult max_product(const Graph& g, int max_iters = 100, double damping = 0.0);

}  // namespace dwmap
