// SPDX-License-Identifier: Apache-2.0
//
// Five-state semi-Markov attack-lifecycle model
// (Good -> Vulnerability -> {Detection -> Containment -> Good, Failure -> Good})
// with Weibull-distributed holding times. Produces the steady-state failure
// probability used as the confidence level of the insurance pricing stage.
#ifndef GRIDSURE_SMP_SMP_HPP
#define GRIDSURE_SMP_SMP_HPP

#include <Eigen/Core>
#include <array>
#include <string>

#include "gridsure/common.hpp"
#include "gridsure/dist/weibull.hpp"

namespace gridsure::smp {

using WeibullParams = dist::Weibull<Real>;

enum class State : int { Good = 0, Vulnerability, Detection, Containment, Failure };
inline constexpr int kNumStates = 5;

enum class Transition : int { GV = 0, VD, DC, CG, VF, FG };
inline constexpr int kNumTransitions = 6;

const char* to_string(State s);
const char* to_string(Transition t);
/// Accepts "GV", "G-V" or "G->V" (any case); throws ParseError otherwise.
Transition transition_from_string(const std::string& name);

/// Reading of the Vulnerability-state sojourn integrand. The competing-risks
/// semantics (expected minimum of the two exit clocks) multiplies the two
/// survival functions; the alternative weights the detection survival by the
/// failure density. Both are exposed because published formulations disagree.
enum class SojournConvention { SurvivalProduct, DensityWeighted };

struct SmpSpec {
  std::array<WeibullParams, kNumTransitions> transitions;  // indexed by Transition
  std::string time_unit = "hours";

  const WeibullParams& at(Transition t) const {
    return transitions[static_cast<int>(t)];
  }
  WeibullParams& at(Transition t) { return transitions[static_cast<int>(t)]; }
};

using KernelMatrix = Eigen::Matrix<Real, kNumStates, kNumStates>;
using StateVector = Eigen::Matrix<Real, kNumStates, 1>;

struct SmpResult {
  std::array<Real, kNumTransitions> kernel_limits{};     // k_mn(inf)
  StateVector emc_pi = StateVector::Zero();      // embedded-chain stationary v
  StateVector sojourn = StateVector::Zero();     // expected holding time per state
  StateVector state_probs = StateVector::Zero(); // P_n = v_n T_n / (v . T)
  Real p_fail = 0;                               // state_probs[Failure]
  SojournConvention convention = SojournConvention::SurvivalProduct;
};

/// P(the `first` clock fires before the `competitor` clock) =
/// integral of competitor-survival d first-CDF over [0, inf).
Real competing_kernel(const WeibullParams& first, const WeibullParams& competitor);

/// Expected holding time of a single-exit state: scale * Gamma(1 + 1/shape).
Real sojourn_time(const WeibullParams& p);

/// Same value by adaptive quadrature of the survival function
/// (cross-check route; also the only route for beta where no closed form
/// is wanted).
Real sojourn_time_quadrature(const WeibullParams& p);

/// Expected minimum of two independent Weibull clocks (two-exit state).
Real competing_sojourn(const WeibullParams& a, const WeibullParams& b);

/// Stationary vector of the embedded jump chain: v = v K(inf), sum v = 1.
/// `kernel_limits` is indexed by Transition. Throws SingularChainError if the
/// chain has no unique nonnegative stationary vector.
StateVector solve_emc(const std::array<Real, kNumTransitions>& kernel_limits);

/// Full composition: kernel limits -> EMC -> sojourns -> state probabilities.
SmpResult failure_probability(
    const SmpSpec& spec,
    SojournConvention convention = SojournConvention::SurvivalProduct);

/// Assemble the 5x5 steady-state transition matrix from the six limits.
KernelMatrix kernel_matrix(const std::array<Real, kNumTransitions>& limits);

// --- file interface -------------------------------------------------------

/// Reads a spec file: {"schema_version":1, "time_unit":"hours",
/// "transitions": {"G-V": {"scale":..,"shape":..}, ...}}.
SmpSpec load_smp_spec(const std::string& path);
std::string smp_spec_to_json(const SmpSpec& spec);
std::string smp_result_to_json(const SmpResult& result);

}  // namespace gridsure::smp

#endif  // GRIDSURE_SMP_SMP_HPP
