#include "dwmap/trace.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

namespace dwmap {

namespace {

nlohmann::json to_json(const IterationRecord& r) {
  return nlohmann::json{
      {"iter", r.iter},
      {"objective", r.objective},
      {"columns_added", r.columns_added},
      {"pool_size", r.pool_size},
      {"master_ms", r.master_ms},
      {"pricing_ms", r.pricing_ms},
      {"bytes_tx", r.bytes_tx},
      {"bytes_rx", r.bytes_rx},
  };
}

}  // namespace

void emit_trace(std::ostream& out, const std::vector<IterationRecord>& records) {
  for (const IterationRecord& r : records) out << to_json(r).dump() << '\n';
}

std::vector<IterationRecord> parse_trace(std::istream& in) {
  std::vector<IterationRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    IterationRecord r;
    r.iter = j.at("iter").get<int>();
    r.objective = j.at("objective").get<double>();
    r.columns_added = j.at("columns_added").get<int>();
    r.pool_size = j.at("pool_size").get<int>();
    r.master_ms = j.at("master_ms").get<double>();
    r.pricing_ms = j.at("pricing_ms").get<double>();
    r.bytes_tx = j.at("bytes_tx").get<std::uint64_t>();
    r.bytes_rx = j.at("bytes_rx").get<std::uint64_t>();
    out.push_back(r);
  }
  return out;
}

std::string to_json_line(const ResultRecord& result) {
  nlohmann::json j{
      {"backend", result.backend},
      {"assignment", result.assignment.states},
      {"value", result.value},
      {"fraction_fractional", result.fraction_fractional},
      {"converged", result.converged},
      {"round_exact", result.round_exact},
      {"iterations", result.iterations},
      {"wall_ms", result.wall_ms},
  };
  if (result.lp_objective.has_value()) {
    j["lp_objective"] = *result.lp_objective;
  } else {
    j["lp_objective"] = nullptr;
  }
  return j.dump();
}

}  // namespace dwmap
