// SPDX-License-Identifier: Apache-2.0
//
// Discrete-event simulation of the five-state semi-Markov chain, used as an
// independent oracle for the analytic steady-state probabilities. Holding
// times are drawn by inverse-CDF so the only shared code with the library
// is the Weibull quantile.
#ifndef GRIDSURE_TESTS_SMP_SIMULATOR_HPP
#define GRIDSURE_TESTS_SMP_SIMULATOR_HPP

#include <array>

#include "gridsure/numerics/rng.hpp"
#include "gridsure/smp/smp.hpp"

namespace gridsure::tests {

struct SimResult {
  std::array<double, smp::kNumStates> time_fraction{};
  double total_time = 0;
};

inline SimResult simulate_smp(const smp::SmpSpec& spec, long transitions,
                              std::uint64_t seed) {
  using smp::State;
  using smp::Transition;
  numerics::SplitRng rng(seed, 0);
  auto draw = [&](Transition t) {
    double u = rng.next_uniform();
    if (u >= 1.0) u = std::nextafter(1.0, 0.0);
    return dist::weibull_quantile(spec.at(t), u);
  };

  SimResult out;
  State state = State::Good;
  for (long k = 0; k < transitions; ++k) {
    double hold = 0;
    State next = state;
    switch (state) {
      case State::Good:
        hold = draw(Transition::GV);
        next = State::Vulnerability;
        break;
      case State::Vulnerability: {
        const double td = draw(Transition::VD);
        const double tf = draw(Transition::VF);
        hold = std::min(td, tf);
        next = td < tf ? State::Detection : State::Failure;
        break;
      }
      case State::Detection:
        hold = draw(Transition::DC);
        next = State::Containment;
        break;
      case State::Containment:
        hold = draw(Transition::CG);
        next = State::Good;
        break;
      case State::Failure:
        hold = draw(Transition::FG);
        next = State::Good;
        break;
    }
    out.time_fraction[static_cast<int>(state)] += hold;
    out.total_time += hold;
    state = next;
  }
  for (auto& f : out.time_fraction) f /= out.total_time;
  return out;
}

}  // namespace gridsure::tests

#endif  // GRIDSURE_TESTS_SMP_SIMULATOR_HPP
