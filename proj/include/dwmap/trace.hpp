#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dwmap/decomposition.hpp"
#include "dwmap/model.hpp"

namespace dwmap {

// One JSON object per line, one line per iteration; numbers keep full
// precision.
void emit_trace(std::ostream& out, const std::vector<IterationRecord>& records);
std::vector<IterationRecord> parse_trace(std::istream& in);

struct ResultRecord {
  std::string backend;
  Assignment assignment;
  double value = 0.0;
  std::optional<double> lp_objective;  // upper bound, when an LP was solved
  double fraction_fractional = 0.0;
  bool converged = false;
  bool round_exact = true;
  int iterations = 0;
  double wall_ms = 0.0;
};

std::string to_json_line(const ResultRecord& result);

}  // namespace dwmap
