// SPDX-License-Identifier: Apache-2.0
//
// Synthetic radial network at the scale of a large distribution system
// (7 feeders x 17 buses + substation = 120 buses, 24 hours, 7 PV + 7 BESS).
// Structure mirrors the big published cases; the data is generated.
#ifndef GRIDSURE_TESTS_SYNTHETIC_HPP
#define GRIDSURE_TESTS_SYNTHETIC_HPP

#include "gridsure/grid/model.hpp"

namespace gridsure::tests {

inline grid::NetworkModel synthetic_120bus() {
  grid::NetworkModel m;
  m.base = {100.0, 110.0};
  const int T = 24;
  auto& p = m.policy;
  p.time_steps = T;
  p.time_step_hours = 1;
  p.buy_price.resize(T);
  p.sell_price.resize(T);
  const double price_shape[24] = {0.2, 0.15, 0.1, 0.1,  0.1, 0.2, 0.35, 0.5,
                                  0.6, 0.6,  0.55, 0.5, 0.45, 0.4, 0.4, 0.5,
                                  0.7, 0.9,  1.0, 1.0,  0.9, 0.7, 0.5, 0.35};
  const double load_shape[24] = {0.55, 0.5,  0.47, 0.45, 0.45, 0.5, 0.6, 0.72,
                                 0.8,  0.82, 0.8,  0.78, 0.75, 0.72, 0.7, 0.72,
                                 0.8,  0.92, 1.0,  0.98, 0.9,  0.8, 0.7, 0.6};
  const double pv_bell[24] = {0,    0,    0,    0,    0,    0.05, 0.15, 0.3,
                              0.5,  0.7,  0.85, 0.95, 1.0,  0.95, 0.85, 0.7,
                              0.5,  0.3,  0.15, 0.05, 0,    0,    0,    0};
  for (int t = 0; t < T; ++t) {
    p.buy_price[t] = 0.06 + 0.12 * price_shape[t];
    p.sell_price[t] = 0.75 * p.buy_price[t];
  }
  p.curtail_fraction_max = 0.5;
  p.curtail_penalty = 0.5;
  p.delta_bus = 0.3;
  p.delta_system = 0.1;
  p.v_min = 0.94;
  p.v_max = 1.06;
  p.v_root = 1.0;

  grid::Bus root;
  root.id = 0;
  root.is_root = true;
  root.is_market_node = true;
  root.load_p = grid::Profile::Zero(T);
  root.load_q = grid::Profile::Zero(T);
  m.buses.push_back(root);
  int id = 1;
  for (int feeder = 0; feeder < 7; ++feeder) {
    int prev = 0;
    for (int k = 0; k < 17; ++k) {
      grid::Bus b;
      b.id = id;
      const double peak = 0.4 + 0.12 * ((id * 7) % 13);
      b.load_p.resize(T);
      b.load_q.resize(T);
      for (int t = 0; t < T; ++t) {
        b.load_p[t] = peak * load_shape[t];
        b.load_q[t] = 0.33 * peak * load_shape[t];
      }
      if (k == 8) {
        grid::PvUnit pv;
        pv.capacity = grid::Profile::Constant(T, 3.0);
        pv.generation.resize(T);
        for (int t = 0; t < T; ++t) pv.generation[t] = 2.7 * pv_bell[t];
        b.pv = pv;
        grid::BessUnit s;
        s.capacity = 2.0;
        s.rate_limit = 1.0;
        s.efficiency = 0.93;
        s.initial_energy = 1.0;
        b.bess = s;
      }
      m.buses.push_back(b);
      m.lines.push_back({prev, id, 0.004 + 0.002 * (k % 2), 0.008 + 0.004 * (k % 2)});
      prev = id;
      ++id;
    }
  }
  grid::validate_network(m);
  return m;
}

}  // namespace gridsure::tests

#endif  // GRIDSURE_TESTS_SYNTHETIC_HPP
