// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "gridsure/opf/opf.hpp"

namespace gridsure::opf {

using grid::NetworkModel;

OpfOutcome solve_opf_status(const OpfProblem& problem, const OpfSolveOptions& options) {
  lp::SolveOptions lp_opt = options.lp;
  lp_opt.relax_integrality = options.relax_binaries || lp_opt.relax_integrality;
  lp::LpSolution raw = lp::solve_no_throw(problem.lp, lp_opt);
  OpfOutcome out;
  out.status = raw.status;
  out.detail = raw.detail;
  if (raw.status == lp::SolveStatus::Optimal)
    out.solution = extract_dispatch(problem, raw);
  return out;
}

DispatchSolution solve_opf(const OpfProblem& problem, const OpfSolveOptions& options) {
  OpfOutcome out = solve_opf_status(problem, options);
  switch (out.status) {
    case lp::SolveStatus::Optimal:
      return std::move(*out.solution);
    case lp::SolveStatus::Infeasible:
      throw InfeasibleError(out.detail.empty() ? "dispatch infeasible" : out.detail);
    case lp::SolveStatus::Unbounded:
      throw UnboundedError(
          "dispatch problem unbounded; check sell/buy prices against the "
          "market loss convention");
    case lp::SolveStatus::NodeLimit:
      throw ExactnessLostError("branch-and-bound node cap reached");
    default:
      throw SolverError("dispatch solve failed: " + out.detail);
  }
}

DispatchSolution solve_model(const NetworkModel& model,
                             const std::optional<DemandOverride>& demand_override,
                             const OpfSolveOptions& options) {
  OpfProblem problem = build_opf(model, demand_override);
  if (options.lp.warm_basis != nullptr) return solve_opf(problem, options);
  // seed from the structural crash basis when the caller has nothing better
  OpfSolveOptions opt = options;
  const lp::Basis crash = crash_basis(problem);
  opt.lp.warm_basis = &crash;
  return solve_opf(problem, opt);
}

IncentiveResult compute_one_time_incentive(const NetworkModel& model,
                                           const OpfSolveOptions& options) {
  // both solves run with b = 0: the gap being priced must not include b
  NetworkModel with = model;
  with.policy.one_time_incentive = 0;
  IncentiveResult res;
  res.cost_with_curtailment = solve_model(with, {}, options).cost_total;

  NetworkModel without = with;
  without.policy.curtail_fraction_max = 0;
  Real gamma_floor = 0;
  Real cost_without = 0;
  try {
    cost_without = solve_model(without, {}, options).cost_total;
  } catch (const InfeasibleError&) {
    // voltage limits need some curtailment; bisect the smallest feasible
    // allowance and price the gap against it
    Real lo = 0, hi = model.policy.curtail_fraction_max;
    NetworkModel probe = with;
    probe.policy.curtail_fraction_max = hi;
    DispatchSolution best = solve_model(probe, {}, options);
    for (int it = 0; it < 30 && hi - lo > 1e-6; ++it) {
      const Real mid = 0.5 * (lo + hi);
      probe.policy.curtail_fraction_max = mid;
      try {
        best = solve_model(probe, {}, options);
        hi = mid;
      } catch (const InfeasibleError&) {
        lo = mid;
      }
    }
    gamma_floor = hi;
    cost_without = best.cost_total;
  }
  res.cost_without_curtailment = cost_without;
  res.gamma_floor = gamma_floor;
  const Real gap = cost_without - res.cost_with_curtailment;
  res.economically_viable = gap >= 0;
  res.b = std::max(Real(0), gap);
  return res;
}

}  // namespace gridsure::opf
