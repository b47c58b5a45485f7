#pragma once

#include <stdexcept>
#include <string>

#include "dwmap/model.hpp"

namespace dwmap {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(column) +
                           ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct UaiOptions {
  // true: table values are log-potentials and pass through unchanged.
  // false: values are linear-domain (probabilities); the natural log is
  // applied, flooring at zero_floor first.
  bool log_domain = true;
  double zero_floor = 1e-300;
};

// UAI MARKOV reader: variable count, cardinalities, clique scopes, then one
// table per clique in scope order. Unary cliques feed local potentials,
// binary cliques pairwise potentials; repeated scopes accumulate; higher
// arities are rejected.
Graph parse_uai(const std::string& text, const UaiOptions& opts = {});

}  // namespace dwmap
