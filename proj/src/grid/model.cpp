// SPDX-License-Identifier: Apache-2.0
#include "gridsure/grid/model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace gridsure::grid {

int NetworkModel::bus_index(int id) const {
  for (int i = 0; i < num_buses(); ++i)
    if (buses[i].id == id) return i;
  throw ValidationError("unknown bus id " + std::to_string(id));
}

int NetworkModel::root_index() const {
  for (int i = 0; i < num_buses(); ++i)
    if (buses[i].is_root) return i;
  throw ValidationError("no root bus flagged");
}

std::vector<OrientedLine> validate_radial(const NetworkModel& model) {
  const int nb = model.num_buses();
  if (model.num_lines() != nb - 1)
    throw ValidationError("non-radial: " + std::to_string(model.num_lines()) +
                          " lines for " + std::to_string(nb) +
                          " buses (tree needs " + std::to_string(nb - 1) + ")");

  // adjacency over bus indices
  std::vector<std::vector<std::pair<int, int>>> adj(nb);  // (neighbor, line idx)
  for (int l = 0; l < model.num_lines(); ++l) {
    const Line& ln = model.lines[l];
    const int a = model.bus_index(ln.from);
    const int b = model.bus_index(ln.to);
    if (a == b)
      throw ValidationError("non-radial: line " + std::to_string(l) +
                            " is a self-loop at bus " + std::to_string(ln.from));
    adj[a].emplace_back(b, l);
    adj[b].emplace_back(a, l);
  }

  const int root = model.root_index();
  std::vector<int> parent(nb, -2);
  std::vector<OrientedLine> order;
  order.reserve(model.num_lines());
  std::queue<int> frontier;
  parent[root] = -1;
  frontier.push(root);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (const auto& [v, l] : adj[u]) {
      if (parent[v] != -2) continue;  // visited (the edge back to the parent)
      parent[v] = u;
      order.push_back({u, v, model.lines[l].r, model.lines[l].x, l});
      frontier.push(v);
    }
  }
  for (int i = 0; i < nb; ++i) {
    if (parent[i] == -2)
      throw ValidationError("non-radial: bus " + std::to_string(model.buses[i].id) +
                            " is disconnected from the root");
  }
  if (static_cast<int>(order.size()) != model.num_lines())
    throw ValidationError("non-radial: line set contains a cycle");
  return order;
}

namespace {

void check_profile(const Profile& p, int T, const std::string& what) {
  if (p.size() != T)
    throw ValidationError(what + ": profile has " + std::to_string(p.size()) +
                          " entries, expected " + std::to_string(T));
  for (int t = 0; t < T; ++t)
    if (!std::isfinite(p[t]))
      throw ValidationError(what + ": non-finite entry at hour " + std::to_string(t));
}

}  // namespace

void validate_network(NetworkModel& model) {
  const int T = model.policy.time_steps;
  if (T < 1) throw ValidationError("policy.time_steps must be >= 1");
  if (!(model.policy.time_step_hours > 0))
    throw ValidationError("policy.time_step_hours must be > 0");

  if (model.num_buses() == 0) throw ValidationError("no buses");
  int roots = 0;
  for (const Bus& b : model.buses) roots += b.is_root ? 1 : 0;
  if (roots != 1)
    throw ValidationError("exactly one root bus required, found " +
                          std::to_string(roots));

  // unique ids
  {
    std::vector<int> ids;
    for (const Bus& b : model.buses) ids.push_back(b.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw ValidationError("duplicate bus id");
  }

  for (const Bus& b : model.buses) {
    const std::string who = "bus " + std::to_string(b.id);
    check_profile(b.load_p, T, who + " load_p");
    check_profile(b.load_q, T, who + " load_q");
    for (int t = 0; t < T; ++t)
      if (b.load_p[t] < 0)
        throw ValidationError(who + ": negative active demand at hour " +
                              std::to_string(t));
    if (b.pv) {
      check_profile(b.pv->capacity, T, who + " pv capacity");
      check_profile(b.pv->generation, T, who + " pv generation");
      for (int t = 0; t < T; ++t) {
        if (b.pv->capacity[t] < 0)
          throw ValidationError(who + ": negative PV capacity at hour " +
                                std::to_string(t));
        if (b.pv->generation[t] < 0 || b.pv->generation[t] > b.pv->capacity[t])
          throw ValidationError(who + ": PV generation outside [0, capacity] at hour " +
                                std::to_string(t));
      }
    }
    if (b.bess) {
      const BessUnit& s = *b.bess;
      if (!(s.capacity >= 0))
        throw ValidationError(who + ": negative battery capacity");
      if (!(s.rate_limit > 0))
        throw ValidationError(who + ": battery rate limit must be > 0");
      if (!(s.efficiency > 0 && s.efficiency <= 1))
        throw ValidationError(who + ": battery efficiency must be in (0, 1]");
      if (s.initial_energy < 0 || s.initial_energy > s.capacity)
        throw ValidationError(who + ": initial energy outside [0, capacity]");
    }
  }

  for (const Line& l : model.lines) {
    if (l.r < 0 || l.x < 0)
      throw ValidationError("line " + std::to_string(l.from) + "-" +
                            std::to_string(l.to) + ": negative impedance");
    (void)model.bus_index(l.from);
    (void)model.bus_index(l.to);
  }

  const TariffAndPolicy& p = model.policy;
  check_profile(p.buy_price, T, "buy_price");
  check_profile(p.sell_price, T, "sell_price");
  if (!(p.market_loss_factor > 0 && p.market_loss_factor <= 1))
    throw ValidationError("market_loss_factor must be in (0, 1]");
  if (p.curtail_fraction_max < 0 || p.curtail_fraction_max > 1)
    throw ValidationError("curtail_fraction_max must be in [0, 1]");
  if (p.curtail_penalty < 0) throw ValidationError("curtail_penalty must be >= 0");
  if (p.delta_bus < 0 || p.delta_bus > 1)
    throw ValidationError("delta_bus must be in [0, 1]");
  if (p.delta_system < 0 || p.delta_system > 1)
    throw ValidationError("delta_system must be in [0, 1]");
  if (!(p.v_min < p.v_max)) throw ValidationError("v_min must be < v_max");
  if (!(p.v_root > 0)) throw ValidationError("v_root must be > 0");
  if (p.curtail_breakpoints < 1)
    throw ValidationError("curtail_breakpoints must be >= 1");

  for (int t = 0; t < T; ++t) {
    if (p.sell_price[t] > p.buy_price[t]) {
      model.warnings.push_back("sell price exceeds buy price at hour " +
                               std::to_string(t) +
                               " (risk-free arbitrage if losses allow)");
      break;
    }
  }
  if (p.delta_system > p.delta_bus)
    model.warnings.push_back(
        "delta_system > delta_bus: the system budget never binds");

  (void)validate_radial(model);
}

Eigen::ArrayXXd demand_p_matrix(const NetworkModel& model) {
  Eigen::ArrayXXd d(model.num_buses(), model.time_steps());
  for (int i = 0; i < model.num_buses(); ++i) d.row(i) = model.buses[i].load_p.transpose();
  return d;
}

Eigen::ArrayXXd demand_q_matrix(const NetworkModel& model) {
  Eigen::ArrayXXd d(model.num_buses(), model.time_steps());
  for (int i = 0; i < model.num_buses(); ++i) d.row(i) = model.buses[i].load_q.transpose();
  return d;
}

}  // namespace gridsure::grid
