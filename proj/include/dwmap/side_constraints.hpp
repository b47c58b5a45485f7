#pragma once

#include <stdexcept>
#include <vector>

#include "dwmap/model.hpp"
#include "dwmap/relaxation.hpp"

namespace dwmap {

struct LinearTerm {
  NodeId node = -1;
  int state = -1;
  double coeff = 0.0;
};

// Global solution constraint over node indicators x_s^i. AtMostOnePerState
// is the injective-matching constraint of data association: no two nodes may
// share a state, except for an optional catch-all outlier state.
struct SideConstraint {
  enum class Kind { AtMostOnePerState, GenericLinear };

  Kind kind = Kind::AtMostOnePerState;
  int outlier_state = -1;          // AtMostOnePerState; -1 = no exemption
  std::vector<LinearTerm> terms;   // GenericLinear
  Sense sense = Sense::LE;         // GenericLinear
  double rhs = 0.0;                // GenericLinear

  static SideConstraint injective(int outlier = -1) {
    SideConstraint sc;
    sc.kind = Kind::AtMostOnePerState;
    sc.outlier_state = outlier;
    return sc;
  }
  static SideConstraint linear(std::vector<LinearTerm> terms, Sense sense, double rhs) {
    SideConstraint sc;
    sc.kind = Kind::GenericLinear;
    sc.terms = std::move(terms);
    sc.sense = sense;
    sc.rhs = rhs;
    return sc;
  }
};

// Appends side rows to the constraint system. Each node indicator x_s^i is
// rewritten through the marginalizer row of the node's designated incident
// edge (the lowest edge id); consistency rows make every incident edge's
// marginal equal, so the choice does not change the feasible set. Throws on
// constraints over isolated nodes or invalid (node, state) pairs.
void inject(ConstraintSystem& cs, const std::vector<SideConstraint>& constraints,
            const Graph& g);

// True when the integral assignment satisfies every side constraint.
bool satisfies(const Graph& g, const Assignment& a,
               const std::vector<SideConstraint>& constraints);

struct FeasibleInitOptions {
  int max_nodes_exhaustive = 256;       // above this, greedy failure is an error
  long long max_expansions = 50'000'000;  // backtracking circuit breaker
};

// Thrown when exhaustive backtracking proves there is no feasible
// assignment.
class UnsatisfiableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Initial assignment satisfying all side constraints: greedy adjusted
// initialization (nodes in descending-degree order pick their best
// still-feasible state), falling back to backtracking search.
Assignment feasible_init(const Graph& g, const std::vector<SideConstraint>& constraints,
                         const FeasibleInitOptions& opts = {});

}  // namespace dwmap
