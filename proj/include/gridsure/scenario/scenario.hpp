// SPDX-License-Identifier: Apache-2.0
//
// Scenario layer: Monte Carlo sampling of load variations inside the
// (delta_bus, delta_system) polytope, the greedy-vertex worst-case search,
// and constructed load-altering-attack scenarios.
#ifndef GRIDSURE_SCENARIO_SCENARIO_HPP
#define GRIDSURE_SCENARIO_SCENARIO_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "gridsure/grid/model.hpp"
#include "gridsure/opf/opf.hpp"

namespace gridsure::scenario {

enum class ScenarioLabel { Sampled, WorstCase, Manual };
const char* to_string(ScenarioLabel label);

struct LoadScenario {
  Eigen::ArrayXXd var_p;  // buses x T, MW
  Eigen::ArrayXXd var_q;  // buses x T, MVar
  std::uint64_t seed = 0;
  ScenarioLabel label = ScenarioLabel::Manual;
};

/// Checks the per-bus bounds and the hourly system-wide budgets. Empty
/// detail means every inequality holds.
struct ScenarioCheck {
  bool ok = true;
  std::string detail;
};
ScenarioCheck check_scenario(const grid::NetworkModel& model, const LoadScenario& s);

/// Effective demand fed to the dispatch problem: nominal + variation, with
/// active power clamped at zero from below.
opf::DemandOverride apply_scenario(const grid::NetworkModel& model, const LoadScenario& s);

/// One Monte Carlo draw: per (bus, hour) a common multiplier
/// X ~ N(0, (delta/3)^2) clamped to [-delta, delta] scales both P and Q
/// (power-factor preserving); the whole day is redrawn until the hourly
/// system budgets hold for both P and Q. Deterministic in (seed, index).
/// Throws RejectionLimitError after 10^4 redraws.
LoadScenario sample_scenario(const grid::NetworkModel& model, std::uint64_t master_seed,
                             std::uint64_t index, long* redraws = nullptr);

struct CostSample {
  long scenario_id = 0;
  std::uint64_t seed = 0;
  Real cost = 0;
  Real cost_normalized = 0;
  lp::SolveStatus status = lp::SolveStatus::Optimal;
};

struct MonteCarloConfig {
  long samples = 1000;
  std::uint64_t master_seed = 1;
  int jobs = 1;
};

struct MonteCarloResult {
  std::vector<CostSample> samples;  // indexed by scenario id
  Real nominal_cost = 0;
  long infeasible_count = 0;
  long total_redraws = 0;
  lp::Basis nominal_basis;  // warm-start handle for further solves
};

/// Samples and solves `config.samples` scenarios. The sample multiset is a
/// pure function of (model, samples, master_seed) regardless of job count:
/// scenario k draws from stream k and is always warm-started from the
/// nominal basis.
MonteCarloResult run_monte_carlo(const grid::NetworkModel& model,
                                 const MonteCarloConfig& config);

/// Values above which costs of successfully solved scenarios are collected.
std::vector<Real> normalized_costs(const MonteCarloResult& result);

struct WorstCaseConfig {
  int restarts = 8;      // random sign patterns beyond the all-plus start
  int max_sweeps = 60;   // coordinate passes per restart
  std::uint64_t seed = 2024;
  Real improve_tol = 1e-9;
};

struct WorstCaseResult {
  LoadScenario scenario;
  Real cost = 0;          // LL optimum with binaries restored
  Real nominal_cost = 0;
  bool certified = true;  // restarts agreed within 0.1 %
  std::vector<Real> restart_costs;
};

/// Maximizes the dispatch optimum over the variation polytope by greedy
/// coordinate vertex search with budget projection. The lower level is
/// solved with binaries relaxed during the search (the LP value function is
/// convex in the variation, so the maximum sits at a vertex) and re-solved
/// with binaries restored for the reported cost.
WorstCaseResult worst_case(const grid::NetworkModel& model,
                           const WorstCaseConfig& config = {});

/// Scale demand (P and Q) on the given buses at one hour; the polytope is
/// deliberately not enforced — attacks may exceed the natural bounds.
LoadScenario apply_laa(const grid::NetworkModel& model, const std::vector<int>& bus_ids,
                       int hour, Real scale);

/// Proportional same-sign scaling onto the hourly budget. After projection
/// each violating hour sums to exactly +/- delta * (column sum of base);
/// non-violating hours are untouched. Exposed because the worst-case oracle
/// must project candidate vertices identically.
void project_budget(const Eigen::ArrayXXd& base_demand, Real delta_system,
                    Eigen::ArrayXXd& variation);

// --- serialization ---------------------------------------------------------

std::string scenario_to_json(const LoadScenario& s);
LoadScenario scenario_from_json(const std::string& text);
std::string samples_to_csv(const MonteCarloResult& result);
std::string samples_summary_json(const MonteCarloResult& result);

}  // namespace gridsure::scenario

#endif  // GRIDSURE_SCENARIO_SCENARIO_HPP
