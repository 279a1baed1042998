// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <string>

#include "gridsure/opf/opf.hpp"

namespace gridsure::opf {

using grid::LossConvention;
using grid::NetworkModel;
using grid::OrientedLine;

namespace {

std::string tag(const char* kind, int bus_id, int t) {
  return std::string(kind) + "[" + std::to_string(bus_id) + "," + std::to_string(t) + "]";
}

// Curtailment below this cap (MW) is treated as unavailable; keeps the
// piecewise breakpoints numerically distinct.
constexpr Real kMinCurtailCap = 1e-9;

}  // namespace

OpfProblem build_opf(const NetworkModel& model,
                     const std::optional<DemandOverride>& demand_override) {
  const int nb = model.num_buses();
  const int T = model.time_steps();
  const grid::TariffAndPolicy& pol = model.policy;
  const Real dt = pol.time_step_hours;

  OpfProblem out;
  out.model = &model;
  out.layout.lines = validate_radial(model);

  // effective demand
  out.demand_p = grid::demand_p_matrix(model);
  out.demand_q = grid::demand_q_matrix(model);
  if (demand_override) {
    if (demand_override->p.rows() != nb || demand_override->p.cols() != T ||
        demand_override->q.rows() != nb || demand_override->q.cols() != T)
      throw ModelError("demand override shape does not match the network");
    if ((demand_override->p < 0).any())
      throw ModelError("demand override contains negative active demand");
    out.demand_p = demand_override->p;
    out.demand_q = demand_override->q;
  }

  lp::LpProblem& lp = out.lp;
  VariableLayout& lay = out.layout;
  auto init = [&](Eigen::ArrayXXi& m, int rows, int cols) {
    m.setConstant(rows, cols, -1);
  };
  init(lay.buy, nb, T);
  init(lay.sell, nb, T);
  init(lay.charge, nb, T);
  init(lay.discharge, nb, T);
  init(lay.mode, nb, T);
  init(lay.soc, nb, T + 1);
  init(lay.curtail_p, nb, T);
  init(lay.curtail_q, nb, T);
  init(lay.pv_q, nb, T);
  init(lay.v_sq, nb, T);
  const int nl = static_cast<int>(lay.lines.size());
  init(lay.flow_p, nl, T);
  init(lay.flow_q, nl, T);

  const int root = model.root_index();

  // --- variables -----------------------------------------------------------

  for (int l = 0; l < nl; ++l) {
    const int cid = model.buses[lay.lines[l].child].id;
    for (int t = 0; t < T; ++t) {
      lay.flow_p(l, t) = lp.add_variable(tag("flow_p", cid, t), -lp::kInf, lp::kInf);
      lay.flow_q(l, t) = lp.add_variable(tag("flow_q", cid, t), -lp::kInf, lp::kInf);
    }
  }

  const Real v_lo = pol.v_min * pol.v_min;
  const Real v_hi = pol.v_max * pol.v_max;
  for (int i = 0; i < nb; ++i) {
    for (int t = 0; t < T; ++t) {
      const bool is_root = i == root;
      lay.v_sq(i, t) = lp.add_variable(tag("v_sq", model.buses[i].id, t),
                                       is_root ? pol.v_root : v_lo,
                                       is_root ? pol.v_root : v_hi);
    }
  }

  for (int i = 0; i < nb; ++i) {
    if (!model.buses[i].is_market_node) continue;
    for (int t = 0; t < T; ++t) {
      lay.buy(i, t) = lp.add_variable(tag("buy", model.buses[i].id, t), 0, lp::kInf);
      lay.sell(i, t) = lp.add_variable(tag("sell", model.buses[i].id, t), 0, lp::kInf);
      lp.add_objective(lay.buy(i, t), pol.buy_price[t] * dt);
      lp.add_objective(lay.sell(i, t), -pol.sell_price[t] * dt);
    }
  }

  for (int i = 0; i < nb; ++i) {
    if (!model.buses[i].bess) continue;
    const grid::BessUnit& s = *model.buses[i].bess;
    const int id = model.buses[i].id;
    for (int t = 0; t < T; ++t) {
      lay.charge(i, t) = lp.add_variable(tag("charge", id, t), 0, s.rate_limit);
      lay.discharge(i, t) = lp.add_variable(tag("discharge", id, t), 0, s.rate_limit);
      lay.mode(i, t) = lp.add_variable(tag("mode", id, t), 0, 1, /*integral=*/true);
    }
    lay.soc(i, 0) = lp.add_variable(tag("soc", id, 0), s.initial_energy, s.initial_energy);
    for (int t = 1; t <= T; ++t) {
      const bool terminal = t == T && pol.terminal_soc_at_least_initial;
      lay.soc(i, t) = lp.add_variable(tag("soc", id, t),
                                      terminal ? s.initial_energy : 0, s.capacity);
    }
  }

  for (int i = 0; i < nb; ++i) {
    if (!model.buses[i].pv) continue;
    const grid::PvUnit& pv = *model.buses[i].pv;
    for (int t = 0; t < T; ++t) {
      const Real s2 = pv.capacity[t] * pv.capacity[t];
      const Real p2 = pv.generation[t] * pv.generation[t];
      if (p2 > s2)
        throw ModelError(tag("pv", model.buses[i].id, t) +
                         ": active generation exceeds apparent capacity");
      const Real bound = std::sqrt(s2 - p2);
      lay.pv_q(i, t) = lp.add_variable(tag("pv_q", model.buses[i].id, t), -bound, bound);
    }
  }

  // curtailment with the convexified sqrt compensation
  const Real gamma = pol.curtail_fraction_max;
  const Real a = pol.curtail_penalty;
  const int K = pol.curtail_breakpoints;
  for (int i = 0; gamma > 0 && i < nb; ++i) {
    const int id = model.buses[i].id;
    for (int t = 0; t < T; ++t) {
      const Real d = out.demand_p(i, t);
      const Real cap = gamma * d;
      if (cap > kMinCurtailCap) {
        lay.curtail_p(i, t) = lp.add_variable(tag("curt_p", id, t), 0, cap);
        if (a > 0) {
          // breakpoints uniform in s = sqrt(d - u); slope on segment k is
          // a / (s_k + s_{k+1}) — exact at breakpoints, conservative between
          lp::PiecewiseCost pw;
          pw.variable = lay.curtail_p(i, t);
          const Real s_max = std::sqrt(d);
          const Real s_min = std::sqrt(d - cap);
          pw.breakpoints.resize(K + 1);
          pw.slopes.resize(K);
          std::vector<Real> s(K + 1);
          for (int k = 0; k <= K; ++k) {
            s[k] = s_max - (s_max - s_min) * k / K;
            pw.breakpoints[k] = d - s[k] * s[k];
          }
          pw.breakpoints[0] = 0;
          pw.breakpoints[K] = cap;
          for (int k = 0; k < K; ++k) pw.slopes[k] = a / (s[k] + s[k + 1]);
          lp.piecewise_terms.push_back(std::move(pw));
        }
      }
      const Real qcap = gamma * std::abs(out.demand_q(i, t));
      if (qcap > kMinCurtailCap)
        lay.curtail_q(i, t) = lp.add_variable(tag("curt_q", id, t), -qcap, qcap);
    }
  }

  // one-time incentive: charged per enrolled bus, once per day. Enrollment
  // is a static contract, so it keys off the nominal profiles, not the
  // override.
  if (gamma > 0) {
    for (int i = 0; i < nb; ++i)
      if (model.buses[i].load_p.maxCoeff() > 0) out.participating.push_back(i);
    lp.objective_constant += pol.one_time_incentive *
                             static_cast<Real>(out.participating.size());
  }

  // --- constraints ---------------------------------------------------------

  // parent line per bus index (-1 for root)
  std::vector<int> parent_line(nb, -1);
  std::vector<std::vector<int>> child_lines(nb);
  for (int l = 0; l < nl; ++l) {
    parent_line[lay.lines[l].child] = l;
    child_lines[lay.lines[l].parent].push_back(l);
  }

  const Real eta_m = pol.market_loss_factor;
  const bool literal = pol.loss_convention == LossConvention::Literal;
  const Real buy_coef = literal ? 1.0 / eta_m : eta_m;
  const Real sell_coef = literal ? eta_m : 1.0 / eta_m;

  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < nb; ++j) {
      const Real rhs = out.demand_p(j, t) -
                       (model.buses[j].pv ? model.buses[j].pv->generation[t] : 0.0);
      auto& row = lp.add_constraint(tag("pbal", model.buses[j].id, t), rhs, rhs);
      if (parent_line[j] >= 0) row.terms.emplace_back(lay.flow_p(parent_line[j], t), 1.0);
      for (int l : child_lines[j]) row.terms.emplace_back(lay.flow_p(l, t), -1.0);
      if (lay.buy(j, t) >= 0) {
        row.terms.emplace_back(lay.buy(j, t), buy_coef);
        row.terms.emplace_back(lay.sell(j, t), -sell_coef);
      }
      if (lay.discharge(j, t) >= 0) {
        row.terms.emplace_back(lay.discharge(j, t), 1.0);
        row.terms.emplace_back(lay.charge(j, t), -1.0);
      }
      if (lay.curtail_p(j, t) >= 0) row.terms.emplace_back(lay.curtail_p(j, t), 1.0);
    }
    for (int j = 0; j < nb; ++j) {
      if (j == root) continue;  // root reactive is balanced by the slack line
      const Real rhs = out.demand_q(j, t);
      auto& row = lp.add_constraint(tag("qbal", model.buses[j].id, t), rhs, rhs);
      row.terms.emplace_back(lay.flow_q(parent_line[j], t), 1.0);
      for (int l : child_lines[j]) row.terms.emplace_back(lay.flow_q(l, t), -1.0);
      if (lay.pv_q(j, t) >= 0) row.terms.emplace_back(lay.pv_q(j, t), 1.0);
      if (lay.curtail_q(j, t) >= 0) row.terms.emplace_back(lay.curtail_q(j, t), 1.0);
    }
    for (int l = 0; l < nl; ++l) {
      const OrientedLine& ln = lay.lines[l];
      auto& row = lp.add_constraint(
          tag("vdrop", model.buses[ln.child].id, t), 0, 0);
      row.terms.emplace_back(lay.v_sq(ln.child, t), 1.0);
      row.terms.emplace_back(lay.v_sq(ln.parent, t), -1.0);
      // flows are in MW, impedances and voltages per-unit on base.mva
      row.terms.emplace_back(lay.flow_p(l, t), 2.0 * ln.r / model.base.mva);
      row.terms.emplace_back(lay.flow_q(l, t), 2.0 * ln.x / model.base.mva);
    }
  }

  for (int i = 0; i < nb; ++i) {
    if (!model.buses[i].bess) continue;
    const grid::BessUnit& s = *model.buses[i].bess;
    const int id = model.buses[i].id;
    for (int t = 0; t < T; ++t) {
      auto& dyn = lp.add_constraint(tag("soc_dyn", id, t), 0, 0);
      dyn.terms.emplace_back(lay.soc(i, t + 1), 1.0);
      dyn.terms.emplace_back(lay.soc(i, t), -1.0);
      dyn.terms.emplace_back(lay.charge(i, t), -s.efficiency * dt);
      dyn.terms.emplace_back(lay.discharge(i, t), dt / s.efficiency);

      auto& cm = lp.add_constraint(tag("chmode", id, t), -lp::kInf, 0);
      cm.terms.emplace_back(lay.charge(i, t), 1.0);
      cm.terms.emplace_back(lay.mode(i, t), -s.rate_limit);

      auto& dm = lp.add_constraint(tag("dismode", id, t), -lp::kInf, s.rate_limit);
      dm.terms.emplace_back(lay.discharge(i, t), 1.0);
      dm.terms.emplace_back(lay.mode(i, t), s.rate_limit);
    }
  }

  lp::validate(lp);
  return out;
}

lp::Basis crash_basis(const OpfProblem& problem) {
  namespace bs = lp::basis_status;
  const NetworkModel& model = *problem.model;
  const VariableLayout& lay = problem.layout;
  const int nb = model.num_buses();
  const int T = model.time_steps();
  const int root = model.root_index();
  const int nl = static_cast<int>(lay.lines.size());

  std::vector<std::int8_t> vs(problem.lp.num_variables(), bs::kAtLower);
  std::vector<std::int8_t> row_status(problem.lp.num_constraints(), bs::kBasic);
  // default nonbasic statuses for variables
  for (int v = 0; v < problem.lp.num_variables(); ++v) {
    const lp::Variable& var = problem.lp.variables[v];
    if (var.lower == -lp::kInf && var.upper == lp::kInf)
      vs[v] = bs::kFree;
    else if (var.lower == -lp::kInf)
      vs[v] = bs::kAtUpper;
  }

  // constraint indices follow build order: per t, nb pbal rows, nb-1 qbal
  // rows, nl vdrop rows; then BESS rows
  const int per_t = nb + (nb - 1) + nl;
  auto pbal_row = [&](int j, int t) { return t * per_t + j; };
  auto qbal_row = [&](int j, int t) {
    return t * per_t + nb + (j < root ? j : j - 1);
  };
  auto vdrop_row = [&](int l, int t) { return t * per_t + nb + (nb - 1) + l; };

  auto make_basic = [&](int var, int row) {
    if (var < 0) return;
    vs[var] = bs::kBasic;
    row_status[row] = bs::kAtLower;  // equality logicals are fixed anyway
  };

  for (int t = 0; t < T; ++t) {
    for (int l = 0; l < nl; ++l) {
      make_basic(lay.flow_p(l, t), pbal_row(lay.lines[l].child, t));
      make_basic(lay.flow_q(l, t), qbal_row(lay.lines[l].child, t));
      make_basic(lay.v_sq(lay.lines[l].child, t), vdrop_row(l, t));
    }
    // the root balance is carried by the market purchase when available
    make_basic(lay.buy(root, t), pbal_row(root, t));
  }
  int row = T * per_t;
  for (int i = 0; i < nb; ++i) {
    if (!model.buses[i].bess) continue;
    for (int t = 0; t < T; ++t) {
      make_basic(lay.soc(i, t + 1), row);  // soc_dyn
      row += 3;                            // skip chmode/dismode (logicals basic)
    }
  }
  return lp::build_basis(problem.lp, vs, row_status);
}

Real curtailment_cost(Real a, Real b, Real demand, Real curtail) {
  if (curtail < 0 || curtail > demand)
    throw DomainError("curtailment_cost: curtail outside [0, demand]");
  if (a < 0) throw DomainError("curtailment_cost: negative penalty");
  return a * (std::sqrt(demand) - std::sqrt(demand - curtail)) + b;
}

}  // namespace gridsure::opf
