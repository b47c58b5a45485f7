#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dwmap/runtime.hpp"
#include "dwmap/solve.hpp"
#include "dwmap/trace.hpp"

namespace {

int run_solve_command(const std::string& model_path, const dwmap::SolveOptions& opts,
                      const dwmap::UaiOptions& uai_opts, const std::string& trace_path,
                      const std::string& output_path, bool inject_injective,
                      int outlier_state) {
  dwmap::ModelFile model = dwmap::load_model(model_path, uai_opts);
  if (inject_injective) {
    model.constraints.push_back(dwmap::SideConstraint::injective(outlier_state));
  }

  const dwmap::SolveOutput out = dwmap::run_solve(model, opts);

  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) {
      std::cerr << "cannot open trace file: " << trace_path << "\n";
      return 1;
    }
    dwmap::emit_trace(trace, out.trace);
  }
  const std::string line = dwmap::to_json_line(out.result);
  if (output_path.empty()) {
    std::cout << line << "\n";
  } else {
    std::ofstream res(output_path);
    if (!res) {
      std::cerr << "cannot open output file: " << output_path << "\n";
      return 1;
    }
    res << line << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP inference for discrete pairwise MRFs via the edge-variable LP "
               "relaxation, solved directly or by Dantzig-Wolfe column generation"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve a model file");
  std::string model_path;
  solve->add_option("model", model_path, "model file (.uai MARKOV or dwmap-model)")
      ->required();
  std::string backend = "dw";
  solve->add_option("--backend", backend, "dw | direct-lp | brute | max-product")
      ->default_str("dw");
  dwmap::SolveOptions opts;
  solve->add_option("--max-iters", opts.dw.max_iterations, "iteration cap");
  solve->add_option("--columns-per-iter", opts.dw.columns_per_iteration,
                    "columns added per iteration");
  solve->add_option("--purge-after-seconds", opts.dw.purge_after_seconds,
                    "purge non-basic columns when a master solve exceeds this (off by default)");
  std::string tie_rule = "lowest-index";
  solve->add_option("--tie-rule", tie_rule, "lowest-index | max-cost");
  solve->add_option("--tol", opts.dw.tol, "reduced-cost tolerance");
  solve->add_option("--round-eps", opts.round_eps, "surviving-state threshold for rounding");
  solve->add_option("--workers", opts.workers, "in-process pricing workers (0 = all cores)");
  solve->add_option("--listen", opts.listen, "host:port to coordinate remote workers");
  solve->add_option("--remote-workers", opts.remote_workers,
                    "number of remote workers to wait for");
  solve->add_option("--max-product-iters", opts.max_product_iters,
                    "message-passing iteration cap");
  solve->add_option("--damping", opts.damping, "message damping in [0,1)");
  std::string trace_path;
  solve->add_option("--trace", trace_path, "write per-iteration records (JSON lines)");
  std::string output_path;
  solve->add_option("--output", output_path, "write the result record here instead of stdout");
  dwmap::UaiOptions uai_opts;
  solve->add_flag("--log-domain,!--linear-domain", uai_opts.log_domain,
                  "treat UAI tables as log potentials (default) or probabilities");
  solve->add_option("--zero-floor", uai_opts.zero_floor,
                    "floor before log in linear-domain mode");
  std::string constraint;
  solve->add_option("--constraint", constraint, "global solution constraint: injective");
  int outlier_state = -1;
  solve->add_option("--outlier-state", outlier_state,
                    "state exempt from the injective constraint");

  // worker
  auto* worker = app.add_subcommand("worker", "serve pricing requests for a coordinator");
  std::string connect;
  worker->add_option("--connect", connect, "coordinator host:port")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(worker)) {
      const auto [host, port] = dwmap::parse_endpoint(connect);
      dwmap::run_worker(host, port);
      return 0;
    }
    opts.backend = dwmap::backend_from_string(backend);
    if (tie_rule == "lowest-index") {
      opts.dw.tie_rule = dwmap::TieRule::LowestIndex;
    } else if (tie_rule == "max-cost") {
      opts.dw.tie_rule = dwmap::TieRule::MaxCost;
    } else {
      std::cerr << "unknown tie rule '" << tie_rule << "'\n";
      return 2;
    }
    bool injective = false;
    if (constraint == "injective") {
      injective = true;
    } else if (!constraint.empty()) {
      std::cerr << "unknown constraint '" << constraint << "'\n";
      return 2;
    }
    return run_solve_command(model_path, opts, uai_opts, trace_path, output_path, injective,
                             outlier_state);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
