// SPDX-License-Identifier: Apache-2.0
//
// Static description of the radial distribution grid: buses with hourly
// demand profiles, PV and battery placements, lines with per-unit
// impedances, and every scalar knob of the cost model. Immutable after
// construction and shared read-only by the scenario workers.
#ifndef GRIDSURE_GRID_MODEL_HPP
#define GRIDSURE_GRID_MODEL_HPP

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "gridsure/common.hpp"

namespace gridsure::grid {

using Profile = Eigen::ArrayXd;  // one entry per hour, length T

struct PvUnit {
  Profile capacity;    // apparent-power capacity per hour, MVA
  Profile generation;  // active generation per hour, MW
};

struct BessUnit {
  Real capacity = 0;        // MWh
  Real rate_limit = 0;      // MW, common charge/discharge limit
  Real efficiency = 1.0;    // in (0, 1]
  Real initial_energy = 0;  // MWh at t = 0
};

struct Bus {
  int id = 0;
  std::string name;
  Profile load_p;  // nominal active demand, MW
  Profile load_q;  // nominal reactive demand, MVar
  std::optional<PvUnit> pv;
  std::optional<BessUnit> bess;
  bool is_market_node = false;
  bool is_root = false;
};

struct Line {
  int from = 0;  // bus ids as written in the file
  int to = 0;
  Real r = 0;  // p.u.
  Real x = 0;  // p.u.
};

enum class LossConvention { Literal, Physical };

struct TariffAndPolicy {
  int time_steps = 24;       // T
  Real time_step_hours = 1;  // dt
  Profile buy_price;         // currency per MWh, length T
  Profile sell_price;
  Real market_loss_factor = 1.0;  // eta_M in (0, 1]
  LossConvention loss_convention = LossConvention::Literal;
  Real curtail_fraction_max = 0;  // gamma in [0, 1]
  Real curtail_penalty = 0;       // a >= 0
  Real one_time_incentive = 0;    // b, currency
  Real delta_bus = 0;             // per-bus variation bound
  Real delta_system = 0;          // hourly system-wide variation budget
  Real v_min = 0.94;              // p.u.
  Real v_max = 1.06;              // p.u.
  Real v_root = 1.0;              // root squared voltage, p.u.^2
  bool terminal_soc_at_least_initial = true;
  int curtail_breakpoints = 16;   // K segments of the sqrt convexification
};

struct BaseUnits {
  Real mva = 1.0;
  Real kv = 1.0;
};

struct NetworkModel {
  BaseUnits base;
  TariffAndPolicy policy;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<std::string> warnings;  // soft validation findings

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }
  int time_steps() const { return policy.time_steps; }

  /// Position of the bus with the given file id; throws if unknown.
  int bus_index(int id) const;
  int root_index() const;
};

/// Line oriented away from the root.
struct OrientedLine {
  int parent = 0;  // bus indices (not ids)
  int child = 0;
  Real r = 0;
  Real x = 0;
  int line_index = 0;
};

/// Lines in parent-before-child order from the root; the order downstream
/// sweeps rely on. Throws ValidationError on cycles or disconnected buses.
std::vector<OrientedLine> validate_radial(const NetworkModel& model);

/// Full structural validation (profile lengths, sign constraints, radiality,
/// policy ranges). Populates model.warnings with soft findings
/// (sell > buy price, delta_system > delta_bus). Throws ValidationError.
void validate_network(NetworkModel& model);

/// Nominal hourly demand matrices, buses x T.
Eigen::ArrayXXd demand_p_matrix(const NetworkModel& model);
Eigen::ArrayXXd demand_q_matrix(const NetworkModel& model);

}  // namespace gridsure::grid

#endif  // GRIDSURE_GRID_MODEL_HPP
