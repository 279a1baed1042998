// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gridsure/opf/opf.hpp"

namespace gridsure::opf {

using grid::NetworkModel;

namespace {

Eigen::ArrayXXd gather(const std::vector<Real>& x, const Eigen::ArrayXXi& idx) {
  Eigen::ArrayXXd out(idx.rows(), idx.cols());
  for (Eigen::Index i = 0; i < idx.rows(); ++i)
    for (Eigen::Index j = 0; j < idx.cols(); ++j)
      out(i, j) = idx(i, j) >= 0 ? x[idx(i, j)] : 0.0;
  return out;
}

}  // namespace

DispatchSolution extract_dispatch(const OpfProblem& problem, const lp::LpSolution& lp_sol) {
  const NetworkModel& model = *problem.model;
  const grid::TariffAndPolicy& pol = model.policy;
  const int T = model.time_steps();
  const std::vector<Real>& x = lp_sol.values;
  const VariableLayout& lay = problem.layout;

  DispatchSolution s;
  s.buy = gather(x, lay.buy);
  s.sell = gather(x, lay.sell);
  s.charge = gather(x, lay.charge);
  s.discharge = gather(x, lay.discharge);
  s.mode = gather(x, lay.mode);
  s.soc = gather(x, lay.soc);
  s.curtail_p = gather(x, lay.curtail_p);
  s.curtail_q = gather(x, lay.curtail_q);
  s.pv_q = gather(x, lay.pv_q);
  s.v_sq = gather(x, lay.v_sq);
  s.flow_p = gather(x, lay.flow_p);
  s.flow_q = gather(x, lay.flow_q);
  s.basis = lp_sol.basis;
  s.iterations = lp_sol.iterations;
  s.nodes = lp_sol.nodes;
  s.lp_objective = lp_sol.objective;

  // tiny mode/flow residue below feasibility scale reads as zero
  for (Eigen::Index i = 0; i < s.mode.rows(); ++i)
    for (Eigen::Index t = 0; t < s.mode.cols(); ++t)
      s.mode(i, t) = std::round(s.mode(i, t));

  const Real dt = pol.time_step_hours;
  s.cost_energy = 0;
  for (int t = 0; t < T; ++t)
    s.cost_energy += dt * (pol.buy_price[t] * s.buy.col(t).sum() -
                           pol.sell_price[t] * s.sell.col(t).sum());
  // exact sqrt compensation (the LP carries its piecewise underestimate of
  // sqrt(d - u), i.e. an overestimate of this cost)
  s.cost_curtail = pol.one_time_incentive * static_cast<Real>(problem.participating.size());
  for (int i = 0; i < model.num_buses(); ++i) {
    for (int t = 0; t < T; ++t) {
      if (lay.curtail_p(i, t) < 0) continue;
      const Real d = problem.demand_p(i, t);
      const Real u = std::min(s.curtail_p(i, t), d);
      s.cost_curtail += pol.curtail_penalty * (std::sqrt(d) - std::sqrt(d - u));
    }
  }
  s.cost_total = s.cost_energy + s.cost_curtail;
  return s;
}

std::vector<std::string> check_dispatch(const NetworkModel& model,
                                        const std::optional<DemandOverride>& demand_override,
                                        const DispatchSolution& s, Real tol) {
  std::vector<std::string> bad;
  auto flag = [&](const std::string& msg) { bad.push_back(msg); };
  auto near = [&](Real v, Real target, Real scale) {
    return std::abs(v - target) <= tol * std::max(Real(1), std::abs(scale));
  };
  auto within = [&](Real v, Real lo, Real hi) {
    const Real slack = tol * std::max({Real(1), std::abs(lo), std::abs(hi)});
    return v >= lo - slack && v <= hi + slack;
  };

  const int nb = model.num_buses();
  const int T = model.time_steps();
  const grid::TariffAndPolicy& pol = model.policy;
  const Real dt = pol.time_step_hours;
  Eigen::ArrayXXd dp = grid::demand_p_matrix(model);
  Eigen::ArrayXXd dq = grid::demand_q_matrix(model);
  if (demand_override) {
    dp = demand_override->p;
    dq = demand_override->q;
  }

  const auto lines = validate_radial(model);
  const int root = model.root_index();
  std::vector<int> parent_line(nb, -1);
  std::vector<std::vector<int>> child_lines(nb);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    parent_line[lines[l].child] = static_cast<int>(l);
    child_lines[lines[l].parent].push_back(static_cast<int>(l));
  }

  const Real eta_m = pol.market_loss_factor;
  const bool literal = pol.loss_convention == grid::LossConvention::Literal;

  for (int i = 0; i < nb; ++i) {
    const grid::Bus& bus = model.buses[i];
    const std::string id = std::to_string(bus.id);
    for (int t = 0; t < T; ++t) {
      if (s.buy(i, t) < -tol || s.sell(i, t) < -tol)
        flag("negative market transaction at bus " + id + " hour " + std::to_string(t));
      if (!bus.is_market_node && (s.buy(i, t) > tol || s.sell(i, t) > tol))
        flag("market transaction at non-market bus " + id);

      if (bus.bess) {
        const grid::BessUnit& b = *bus.bess;
        if (!within(s.charge(i, t), 0, b.rate_limit) ||
            !within(s.discharge(i, t), 0, b.rate_limit))
          flag("battery rate bound violated at bus " + id + " hour " + std::to_string(t));
        const Real z = s.mode(i, t);
        if (std::abs(z - std::round(z)) > tol || z < -tol || z > 1 + tol)
          flag("mode variable not binary at bus " + id + " hour " + std::to_string(t));
        if (s.charge(i, t) > b.rate_limit * z + tol * std::max(Real(1), b.rate_limit))
          flag("charging while in discharge mode at bus " + id + " hour " + std::to_string(t));
        if (s.discharge(i, t) >
            b.rate_limit * (1 - z) + tol * std::max(Real(1), b.rate_limit))
          flag("discharging while in charge mode at bus " + id + " hour " + std::to_string(t));
        if (!within(s.soc(i, t + 1), 0, b.capacity))
          flag("state of charge outside [0, capacity] at bus " + id + " hour " +
               std::to_string(t + 1));
        const Real soc_next =
            s.soc(i, t) + (b.efficiency * s.charge(i, t) - s.discharge(i, t) / b.efficiency) * dt;
        if (!near(s.soc(i, t + 1), soc_next, b.capacity))
          flag("state-of-charge dynamics violated at bus " + id + " hour " + std::to_string(t));
      }

      const Real cap = pol.curtail_fraction_max * dp(i, t);
      if (!within(s.curtail_p(i, t), 0, cap))
        flag("active curtailment outside [0, gamma*demand] at bus " + id + " hour " +
             std::to_string(t));
      const Real qcap = pol.curtail_fraction_max * std::abs(dq(i, t));
      if (!within(s.curtail_q(i, t), -qcap, qcap))
        flag("reactive curtailment outside bound at bus " + id + " hour " + std::to_string(t));

      if (bus.pv) {
        const Real bound = std::sqrt(std::max(
            Real(0), bus.pv->capacity[t] * bus.pv->capacity[t] -
                         bus.pv->generation[t] * bus.pv->generation[t]));
        if (!within(s.pv_q(i, t), -bound, bound))
          flag("PV reactive power outside capability at bus " + id + " hour " +
               std::to_string(t));
      } else if (std::abs(s.pv_q(i, t)) > tol) {
        flag("reactive injection at PV-less bus " + id);
      }

      if (i == root) {
        if (!near(s.v_sq(i, t), pol.v_root, 1))
          flag("root voltage not anchored at hour " + std::to_string(t));
      } else if (!within(s.v_sq(i, t), pol.v_min * pol.v_min, pol.v_max * pol.v_max)) {
        flag("voltage bound violated at bus " + id + " hour " + std::to_string(t));
      }
    }
    if (bus.bess && !near(s.soc(i, 0), bus.bess->initial_energy, bus.bess->capacity))
      flag("initial state of charge mismatch at bus " + id);
    if (bus.bess && pol.terminal_soc_at_least_initial &&
        s.soc(i, T) < bus.bess->initial_energy - tol * std::max(Real(1), bus.bess->capacity))
      flag("terminal state of charge below initial at bus " + id);
  }

  // nodal balances and the voltage recursion
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < nb; ++j) {
      const grid::Bus& bus = model.buses[j];
      const Real market = literal
                              ? s.buy(j, t) / eta_m - eta_m * s.sell(j, t)
                              : eta_m * s.buy(j, t) - s.sell(j, t) / eta_m;
      const Real supply = market + s.discharge(j, t) - s.charge(j, t) +
                          (bus.pv ? bus.pv->generation[t] : 0.0);
      const Real load = dp(j, t) - s.curtail_p(j, t);
      Real children = 0;
      for (int l : child_lines[j]) children += s.flow_p(l, t);
      const Real inflow = parent_line[j] >= 0 ? s.flow_p(parent_line[j], t) : 0.0;
      if (!near(inflow + supply - load - children, 0, std::abs(load) + std::abs(supply)))
        flag("active power balance violated at bus " + std::to_string(bus.id) +
             " hour " + std::to_string(t));

      if (j != root) {
        const Real qload = dq(j, t) - s.curtail_q(j, t);
        Real qchildren = 0;
        for (int l : child_lines[j]) qchildren += s.flow_q(l, t);
        if (!near(s.flow_q(parent_line[j], t) + s.pv_q(j, t) - qload - qchildren, 0,
                  std::abs(qload) + 1))
          flag("reactive power balance violated at bus " + std::to_string(bus.id) +
               " hour " + std::to_string(t));
      }
    }
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const grid::OrientedLine& ln = lines[l];
      const Real drop =
          s.v_sq(ln.parent, t) -
          2 * (ln.r * s.flow_p(l, t) + ln.x * s.flow_q(l, t)) / model.base.mva;
      if (!near(s.v_sq(ln.child, t), drop, 1))
        flag("voltage recursion violated on line to bus " +
             std::to_string(model.buses[ln.child].id) + " hour " + std::to_string(t));
    }
  }

  if (!near(s.cost_total, s.cost_energy + s.cost_curtail, std::abs(s.cost_total)))
    flag("cost decomposition identity violated");
  return bad;
}

std::string dispatch_to_csv(const OpfProblem& problem, const DispatchSolution& s) {
  const NetworkModel& model = *problem.model;
  std::ostringstream os;
  os.precision(12);
  os << "bus,t,variable,value\n";
  auto emit = [&](const char* name, const Eigen::ArrayXXd& m,
                  const Eigen::ArrayXXi& idx) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index t = 0; t < m.cols(); ++t)
        if (idx(i, t) >= 0)
          os << model.buses[i].id << ',' << t << ',' << name << ',' << m(i, t) << '\n';
  };
  const VariableLayout& lay = problem.layout;
  emit("buy", s.buy, lay.buy);
  emit("sell", s.sell, lay.sell);
  emit("charge", s.charge, lay.charge);
  emit("discharge", s.discharge, lay.discharge);
  emit("mode", s.mode, lay.mode);
  emit("soc", s.soc, lay.soc);
  emit("curtail_p", s.curtail_p, lay.curtail_p);
  emit("curtail_q", s.curtail_q, lay.curtail_q);
  emit("pv_q", s.pv_q, lay.pv_q);
  emit("v_sq", s.v_sq, lay.v_sq);
  // line flows keyed by the child bus of the oriented line
  for (std::size_t l = 0; l < lay.lines.size(); ++l) {
    for (Eigen::Index t = 0; t < s.flow_p.cols(); ++t) {
      os << model.buses[lay.lines[l].child].id << ',' << t << ",flow_p,"
         << s.flow_p(Eigen::Index(l), t) << '\n';
      os << model.buses[lay.lines[l].child].id << ',' << t << ",flow_q,"
         << s.flow_q(Eigen::Index(l), t) << '\n';
    }
  }
  return os.str();
}

std::string dispatch_to_json(const OpfProblem& problem, const DispatchSolution& s) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["cost_total"] = s.cost_total;
  j["cost_energy"] = s.cost_energy;
  j["cost_curtail"] = s.cost_curtail;
  j["lp_objective"] = s.lp_objective;
  j["iterations"] = s.iterations;
  j["nodes"] = s.nodes;
  auto matrix = [](const Eigen::ArrayXXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index t = 0; t < m.cols(); ++t) row.push_back(m(i, t));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["buy"] = matrix(s.buy);
  j["sell"] = matrix(s.sell);
  j["charge"] = matrix(s.charge);
  j["discharge"] = matrix(s.discharge);
  j["soc"] = matrix(s.soc);
  j["curtail_p"] = matrix(s.curtail_p);
  j["curtail_q"] = matrix(s.curtail_q);
  j["pv_q"] = matrix(s.pv_q);
  j["v_sq"] = matrix(s.v_sq);
  j["flow_p"] = matrix(s.flow_p);
  j["flow_q"] = matrix(s.flow_q);
  nlohmann::json ids = nlohmann::json::array();
  for (const grid::Bus& b : problem.model->buses) ids.push_back(b.id);
  j["bus_ids"] = std::move(ids);
  nlohmann::json line_children = nlohmann::json::array();
  for (const auto& ln : problem.layout.lines)
    line_children.push_back(problem.model->buses[ln.child].id);
  j["line_child_bus"] = std::move(line_children);
  return j.dump(2);
}

}  // namespace gridsure::opf
