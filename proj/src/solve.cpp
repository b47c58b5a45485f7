#include "dwmap/solve.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <stdexcept>
#include <thread>

#include "dwmap/baselines.hpp"
#include "dwmap/rounding.hpp"
#include "dwmap/runtime.hpp"
#include "dwmap/simplex.hpp"

namespace dwmap {

Backend backend_from_string(const std::string& name) {
  if (name == "dw") return Backend::Dw;
  if (name == "direct-lp") return Backend::DirectLp;
  if (name == "brute") return Backend::Brute;
  if (name == "max-product") return Backend::MaxProduct;
  throw std::invalid_argument("unknown backend '" + name + "'");
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::Dw: return "dw";
    case Backend::DirectLp: return "direct-lp";
    case Backend::Brute: return "brute";
    case Backend::MaxProduct: return "max-product";
  }
  return "?";
}

namespace {

int local_argmax(const Graph& g, NodeId s) {
  const std::vector<double>& phi = g.local_potential(s);
  int best = 0;
  for (int i = 1; i < g.cardinality(s); ++i) {
    if (phi[i] > phi[best]) best = i;
  }
  return best;
}

// Side constraints over isolated nodes cannot be lifted into edge variables;
// remap the rest onto the reduced node ids.
std::vector<SideConstraint> remap_constraints(const std::vector<SideConstraint>& constraints,
                                              const IsolatedSplit& split) {
  std::vector<SideConstraint> out;
  for (const SideConstraint& sc : constraints) {
    if (sc.kind == SideConstraint::Kind::AtMostOnePerState) {
      if (!split.isolated.empty()) {
        throw std::invalid_argument(
            "injective constraint over a graph with isolated nodes is not supported");
      }
      out.push_back(sc);
      continue;
    }
    SideConstraint mapped = sc;
    for (LinearTerm& t : mapped.terms) {
      if (t.node < 0 || t.node >= static_cast<int>(split.orig_to_reduced.size()) ||
          split.orig_to_reduced[t.node] < 0) {
        throw std::invalid_argument("side constraint over isolated node " +
                                    std::to_string(t.node));
      }
      t.node = split.orig_to_reduced[t.node];
    }
    out.push_back(std::move(mapped));
  }
  return out;
}

FractionalSolution from_direct_lp(const Graph& g, const std::vector<double>& primal,
                                  double objective) {
  const EdgeVarLayout layout = edge_var_layout(g);
  FractionalSolution sol;
  sol.objective = objective;
  sol.edge_vars.resize(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    sol.edge_vars[e].assign(primal.begin() + layout.offset[e],
                            primal.begin() + layout.offset[e] + g.edge_var_count(e));
    for (double& v : sol.edge_vars[e]) {
      if (v < 0.0 && v > -1e-7) v = 0.0;
    }
  }
  sol.node_marginals.resize(g.num_nodes());
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    const EdgeId e = g.incident_edges(s)[0];
    const Endpoint end = g.edge(e).s == s ? Endpoint::S : Endpoint::T;
    sol.node_marginals[s] = marginalize(g, e, end, sol.edge_vars[e]);
  }
  return sol;
}

}  // namespace

SolveOutput run_solve(const ModelFile& model, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Graph& g = model.graph;
  SolveOutput out;
  out.result.backend = to_string(opts.backend);

  if (opts.backend == Backend::Brute) {
    const BruteForceResult r = brute_force_map(g, model.constraints, opts.brute_cap);
    out.result.assignment = r.assignment;
    out.result.value = r.value;
    out.result.converged = true;
  } else if (opts.backend == Backend::MaxProduct) {
    // Message passing cannot honor global constraints; they are ignored here.
    const MaxProductResult r = max_product(g, opts.max_product_iters, opts.damping);
    out.result.assignment = r.assignment;
    out.result.value = map_objective(g, r.assignment);
    out.result.converged = r.converged;
    out.result.iterations = r.iterations;
  } else {
    const IsolatedSplit split = split_isolated(g);
    const std::vector<SideConstraint> constraints =
        remap_constraints(model.constraints, split);

    Assignment full;
    full.states.assign(static_cast<std::size_t>(g.num_nodes()), 0);
    double fixed_value = 0.0;
    for (NodeId s : split.isolated) {
      full.states[s] = local_argmax(g, s);
      fixed_value += g.local_potential(s)[full.states[s]];
    }

    double lp_part = 0.0;
    int fractional = 0;
    if (split.reduced.num_edges() > 0) {
      const Graph& rg = split.reduced;
      const std::vector<EdgeCost> costs = combined_edge_costs(rg);
      ConstraintSystem cs = build_consistency_rows(rg);
      inject(cs, constraints, rg);

      FractionalSolution frac;
      if (opts.backend == Backend::DirectLp) {
        const DenseLP lp = assemble_full_lp(rg, cs, costs, opts.direct_var_cap);
        SimplexOptions sopts = opts.dw.master;
        const LPSolution sol = solve_lp(lp, sopts);
        if (sol.status != LPStatus::Optimal) {
          throw std::runtime_error("direct LP solve failed: " + to_string(sol.status));
        }
        frac = from_direct_lp(rg, sol.primal, sol.objective);
        out.result.converged = true;
        out.result.iterations = sol.iterations;
      } else {
        DwSolver solver(rg, costs, cs, opts.dw);
        std::unique_ptr<Pricer> pricer;
        std::unique_ptr<RemoteCoordinatorPricer> remote;
        if (!opts.listen.empty()) {
          if (opts.remote_workers < 1) {
            throw std::invalid_argument("--listen requires at least one remote worker");
          }
          const auto [host, port] = parse_endpoint(opts.listen);
          RemotePricerOptions ropts;
          ropts.host = host;
          ropts.port = port;
          ropts.expected_workers = opts.remote_workers;
          remote = std::make_unique<RemoteCoordinatorPricer>(solver.pricing_data(),
                                                             cs.num_rows(), ropts);
          remote->wait_for_workers();
          solver.set_pricer(remote.get());
        } else {
          int workers = opts.workers;
          if (workers == 0) {
            workers = std::max(1u, std::thread::hardware_concurrency());
          }
          if (workers > 1) {
            pricer = std::make_unique<ThreadPoolPricer>(solver.pricing_data(), workers);
            solver.set_pricer(pricer.get());
          }
        }

        if (constraints.empty()) {
          solver.initialize();
        } else {
          solver.initialize_with(feasible_init(rg, constraints));
        }
        solver.run();
        if (remote) remote->shutdown_workers();
        frac = solver.recover();
        out.result.converged = solver.converged();
        out.result.iterations = solver.iterations();
        out.trace = solver.trace();
      }

      const SurvivingStates surviving = fractional_nodes(frac, opts.round_eps);
      const RoundResult rounded = round_ip(rg, surviving, constraints, opts.round_cap);
      out.result.round_exact = rounded.exact;
      fractional = surviving.num_fractional();
      lp_part = frac.objective;
      for (NodeId rs = 0; rs < rg.num_nodes(); ++rs) {
        full.states[split.kept[rs]] = rounded.assignment.states[rs];
      }
    } else {
      out.result.converged = true;
    }

    out.result.assignment = full;
    out.result.value = map_objective(g, full);
    out.result.lp_objective = lp_part + fixed_value;
    out.result.fraction_fractional =
        g.num_nodes() == 0 ? 0.0 : static_cast<double>(fractional) / g.num_nodes();
  }

  out.result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace dwmap
