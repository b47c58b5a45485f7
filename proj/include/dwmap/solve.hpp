#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwmap/decomposition.hpp"
#include "dwmap/model_io.hpp"
#include "dwmap/trace.hpp"

namespace dwmap {

enum class Backend { Dw, DirectLp, Brute, MaxProduct };
Backend backend_from_string(const std::string& name);
std::string to_string(Backend b);

struct SolveOptions {
  Backend backend = Backend::Dw;
  DwConfig dw;
  double round_eps = 1e-6;
  std::uint64_t round_cap = 10'000'000;
  std::uint64_t brute_cap = 10'000'000;
  std::size_t direct_var_cap = 2'000'000;
  int workers = 0;        // 0: hardware concurrency; 1: serial in-process
  std::string listen;     // host:port -> coordinate remote workers instead
  int remote_workers = 0; // required with listen
  int max_product_iters = 50;
  double damping = 0.0;
};

struct SolveOutput {
  ResultRecord result;
  std::vector<IterationRecord> trace;
};

// Runs the selected backend end to end: isolated nodes are split off and
// solved by local argmax, side constraints are injected, the LP part is
// solved (directly or by decomposition), and the fractional solution is
// rounded to an integer assignment.
SolveOutput run_solve(const ModelFile& model, const SolveOptions& opts);

}  // namespace dwmap
