// SPDX-License-Identifier: Apache-2.0
//
// Day-ahead cost-minimization: builds the dispatch MILP (market transactions,
// battery scheduling with charge/discharge exclusivity, curtailment with a
// convexified square-root compensation term, PV reactive support, LinDistFlow
// voltage constraints) and extracts/validates solutions.
#ifndef GRIDSURE_OPF_OPF_HPP
#define GRIDSURE_OPF_OPF_HPP

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "gridsure/grid/model.hpp"
#include "gridsure/lp/problem.hpp"
#include "gridsure/lp/solver.hpp"

namespace gridsure::opf {

/// Effective per-bus per-hour demand replacing the nominal profiles
/// (nominal + variation, P clamped at zero by the caller).
struct DemandOverride {
  Eigen::ArrayXXd p;  // buses x T
  Eigen::ArrayXXd q;
};

/// Column indices into the LpProblem, -1 where a quantity has no variable
/// (e.g. market power at a non-market bus). All matrices are buses x T
/// except soc (buses x T+1) and the flow matrices (lines x T, radial order).
struct VariableLayout {
  Eigen::ArrayXXi buy, sell, charge, discharge, mode;
  Eigen::ArrayXXi soc;
  Eigen::ArrayXXi curtail_p, curtail_q, pv_q, v_sq;
  Eigen::ArrayXXi flow_p, flow_q;
  std::vector<grid::OrientedLine> lines;  // parent-before-child order
};

struct OpfProblem {
  lp::LpProblem lp;
  VariableLayout layout;
  Eigen::ArrayXXd demand_p, demand_q;  // effective demand built against
  std::vector<int> participating;     // buses enrolled in curtailment
  const grid::NetworkModel* model = nullptr;
};

/// Assemble the optimization problem. Throws ModelError if a PV unit's
/// active output exceeds its apparent capacity or the override is negative
/// in P.
OpfProblem build_opf(const grid::NetworkModel& model,
                     const std::optional<DemandOverride>& demand_override = {});

struct DispatchSolution {
  Eigen::ArrayXXd buy, sell;          // MW, buses x T
  Eigen::ArrayXXd charge, discharge;  // MW
  Eigen::ArrayXXd mode;               // z in {0,1}
  Eigen::ArrayXXd soc;                // MWh, buses x (T+1)
  Eigen::ArrayXXd curtail_p;          // MW
  Eigen::ArrayXXd curtail_q;          // MVar
  Eigen::ArrayXXd pv_q;               // MVar
  Eigen::ArrayXXd v_sq;               // p.u.^2
  Eigen::ArrayXXd flow_p, flow_q;     // lines x T, radial order
  Real cost_total = 0;                // = cost_energy + cost_curtail
  Real cost_energy = 0;
  Real cost_curtail = 0;              // exact sqrt expression + incentive term
  Real lp_objective = 0;              // piecewise-linear objective value
  lp::Basis basis;                    // warm-start handle
  long iterations = 0;
  long nodes = 0;
};

struct OpfSolveOptions {
  lp::SolveOptions lp;
  bool relax_binaries = false;
};

/// Solve an assembled problem to optimality (throws on infeasible/unbounded).
DispatchSolution solve_opf(const OpfProblem& problem,
                           const OpfSolveOptions& options = {});

/// Map a raw LP solution onto dispatch quantities, recomputing the exact
/// sqrt compensation cost (mode values are rounded to the nearest integer).
DispatchSolution extract_dispatch(const OpfProblem& problem,
                                  const lp::LpSolution& lp_solution);

/// build + solve convenience.
DispatchSolution solve_model(const grid::NetworkModel& model,
                             const std::optional<DemandOverride>& demand_override = {},
                             const OpfSolveOptions& options = {});

/// Non-throwing variant for scenario sweeps.
struct OpfOutcome {
  lp::SolveStatus status = lp::SolveStatus::Infeasible;
  std::optional<DispatchSolution> solution;
  std::string detail;
};
OpfOutcome solve_opf_status(const OpfProblem& problem,
                            const OpfSolveOptions& options = {});

/// One curtailment compensation term a*(sqrt(d) - sqrt(d - c)) + b.
Real curtailment_cost(Real a, Real b, Real demand, Real curtail);

/// Two-solve gap pricing the one-time participation incentive.
struct IncentiveResult {
  Real b = 0;                       // max(0, gap)
  bool economically_viable = true;  // false reproduces the table's 'x' marker
  Real cost_with_curtailment = 0;
  Real cost_without_curtailment = 0;
  Real gamma_floor = 0;  // smallest feasible curtailment allowance used
};
IncentiveResult compute_one_time_incentive(const grid::NetworkModel& model,
                                           const OpfSolveOptions& options = {});

/// Independent feasibility certificate: re-checks every model constraint
/// directly against the grid data (not through the LpProblem) at the given
/// tolerance. Returns human-readable violations; empty means certified.
std::vector<std::string> check_dispatch(const grid::NetworkModel& model,
                                        const std::optional<DemandOverride>& demand_override,
                                        const DispatchSolution& solution,
                                        Real tol = 1e-6);

/// Crash basis: flows/voltages/SOC basic against their defining rows, which
/// phase 1 then only has to repair where a box constraint actually bites.
lp::Basis crash_basis(const OpfProblem& problem);

/// Results serialization: flat CSV (bus,t,variable,value) and a JSON tree.
std::string dispatch_to_csv(const OpfProblem& problem, const DispatchSolution& s);
std::string dispatch_to_json(const OpfProblem& problem, const DispatchSolution& s);

}  // namespace gridsure::opf

#endif  // GRIDSURE_OPF_OPF_HPP
