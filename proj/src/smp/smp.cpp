// SPDX-License-Identifier: Apache-2.0
#include "gridsure/smp/smp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "gridsure/numerics/quadrature.hpp"

namespace gridsure::smp {

using dist::weibull_pdf;
using dist::weibull_quantile;
using dist::weibull_sf;
using dist::weibull_vanish_time;
using numerics::integrate_checked;

namespace {

constexpr Real kAbsTol = 1e-10;
constexpr Real kErrorBound = 1e-8;

// Quantile-seeded split points so the error estimator cannot step over a
// near-deterministic transition (shapes up to ~400 make the density a spike
// a couple of orders of magnitude narrower than the integration range).
std::vector<Real> quantile_splits(const WeibullParams& w, Real lo, Real hi) {
  static const Real qs[] = {1e-9, 1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25,
                            0.5,  0.75, 0.9,  0.95, 0.99, 0.999, 0.999999};
  std::vector<Real> pts;
  for (Real q : qs) {
    const Real t = weibull_quantile(w, q);
    if (t > lo && t < hi) pts.push_back(t);
  }
  return pts;
}

std::vector<Real> merged_splits(const WeibullParams& a, const WeibullParams& b,
                                Real lo, Real hi) {
  auto pts = quantile_splits(a, lo, hi);
  auto more = quantile_splits(b, lo, hi);
  pts.insert(pts.end(), more.begin(), more.end());
  return pts;
}

void require_valid(const WeibullParams& p, const char* who) {
  if (!p.valid())
    throw DomainError(std::string(who) + ": scale and shape must be positive and finite");
}

}  // namespace

const char* to_string(State s) {
  switch (s) {
    case State::Good: return "Good";
    case State::Vulnerability: return "Vulnerability";
    case State::Detection: return "Detection";
    case State::Containment: return "Containment";
    case State::Failure: return "Failure";
  }
  return "?";
}

const char* to_string(Transition t) {
  switch (t) {
    case Transition::GV: return "G-V";
    case Transition::VD: return "V-D";
    case Transition::DC: return "D-C";
    case Transition::CG: return "C-G";
    case Transition::VF: return "V-F";
    case Transition::FG: return "F-G";
  }
  return "?";
}

Transition transition_from_string(const std::string& name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '>' || c == ' ' || c == '_') continue;
    key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "GV") return Transition::GV;
  if (key == "VD") return Transition::VD;
  if (key == "DC") return Transition::DC;
  if (key == "CG") return Transition::CG;
  if (key == "VF") return Transition::VF;
  if (key == "FG") return Transition::FG;
  throw ParseError("unknown SMP transition '" + name + "'");
}

Real competing_kernel(const WeibullParams& first, const WeibullParams& competitor) {
  require_valid(first, "competing_kernel(first)");
  require_valid(competitor, "competing_kernel(competitor)");
  // Integrand S_competitor * f_first vanishes once either clock's survival
  // is gone, so truncate at the earlier vanish time.
  const Real hi = std::min(weibull_vanish_time(first), weibull_vanish_time(competitor));
  auto integrand = [&](Real t) {
    return weibull_sf(competitor, t) * weibull_pdf(first, t);
  };
  return integrate_checked(integrand, Real(0), hi, kAbsTol, kErrorBound,
                           merged_splits(first, competitor, 0, hi));
}

Real sojourn_time(const WeibullParams& p) {
  require_valid(p, "sojourn_time");
  return dist::weibull_mean(p);
}

Real sojourn_time_quadrature(const WeibullParams& p) {
  require_valid(p, "sojourn_time_quadrature");
  const Real hi = weibull_vanish_time(p);
  auto integrand = [&](Real t) { return weibull_sf(p, t); };
  return integrate_checked(integrand, Real(0), hi, kAbsTol, kErrorBound,
                           quantile_splits(p, 0, hi));
}

Real competing_sojourn(const WeibullParams& a, const WeibullParams& b) {
  require_valid(a, "competing_sojourn");
  require_valid(b, "competing_sojourn");
  const Real hi = std::min(weibull_vanish_time(a), weibull_vanish_time(b));
  auto integrand = [&](Real t) { return weibull_sf(a, t) * weibull_sf(b, t); };
  return integrate_checked(integrand, Real(0), hi, kAbsTol, kErrorBound,
                           merged_splits(a, b, 0, hi));
}

KernelMatrix kernel_matrix(const std::array<Real, kNumTransitions>& k) {
  KernelMatrix K = KernelMatrix::Zero();
  auto idx = [](State s) { return static_cast<int>(s); };
  K(idx(State::Good), idx(State::Vulnerability)) = k[int(Transition::GV)];
  K(idx(State::Vulnerability), idx(State::Detection)) = k[int(Transition::VD)];
  K(idx(State::Vulnerability), idx(State::Failure)) = k[int(Transition::VF)];
  K(idx(State::Detection), idx(State::Containment)) = k[int(Transition::DC)];
  K(idx(State::Containment), idx(State::Good)) = k[int(Transition::CG)];
  K(idx(State::Failure), idx(State::Good)) = k[int(Transition::FG)];
  return K;
}

StateVector solve_emc(const std::array<Real, kNumTransitions>& kernel_limits) {
  const KernelMatrix K = kernel_matrix(kernel_limits);
  for (int r = 0; r < kNumStates; ++r) {
    const Real row_sum = K.row(r).sum();
    if (std::abs(row_sum - 1.0) > 1e-6)
      throw SingularChainError("EMC row for state " +
                               std::string(to_string(static_cast<State>(r))) +
                               " sums to " + std::to_string(row_sum) +
                               ", expected 1");
  }
  // v (K - I) = 0 with the normalization sum(v) = 1 replacing one equation.
  Eigen::Matrix<Real, kNumStates, kNumStates> A = (K.transpose() - KernelMatrix::Identity());
  A.row(kNumStates - 1).setOnes();
  StateVector b = StateVector::Zero();
  b(kNumStates - 1) = 1.0;
  Eigen::FullPivLU<Eigen::Matrix<Real, kNumStates, kNumStates>> lu(A);
  if (!lu.isInvertible())
    throw SingularChainError("embedded chain is reducible; no unique stationary vector");
  StateVector v = lu.solve(b);
  for (int i = 0; i < kNumStates; ++i) {
    if (v(i) < -1e-9)
      throw SingularChainError("stationary vector has a negative entry");
    v(i) = std::max(v(i), Real(0));
  }
  v /= v.sum();
  return v;
}

SmpResult failure_probability(const SmpSpec& spec, SojournConvention convention) {
  SmpResult out;
  out.convention = convention;

  // Single-exit states leave with probability one; only the Vulnerability
  // exits compete.
  out.kernel_limits[int(Transition::GV)] = 1.0;
  out.kernel_limits[int(Transition::DC)] = 1.0;
  out.kernel_limits[int(Transition::CG)] = 1.0;
  out.kernel_limits[int(Transition::FG)] = 1.0;
  out.kernel_limits[int(Transition::VD)] =
      competing_kernel(spec.at(Transition::VD), spec.at(Transition::VF));
  out.kernel_limits[int(Transition::VF)] =
      competing_kernel(spec.at(Transition::VF), spec.at(Transition::VD));

  out.emc_pi = solve_emc(out.kernel_limits);

  out.sojourn(int(State::Good)) = sojourn_time(spec.at(Transition::GV));
  out.sojourn(int(State::Detection)) = sojourn_time(spec.at(Transition::DC));
  out.sojourn(int(State::Containment)) = sojourn_time(spec.at(Transition::CG));
  out.sojourn(int(State::Failure)) = sojourn_time(spec.at(Transition::FG));
  out.sojourn(int(State::Vulnerability)) =
      convention == SojournConvention::SurvivalProduct
          ? competing_sojourn(spec.at(Transition::VD), spec.at(Transition::VF))
          : competing_kernel(spec.at(Transition::VF), spec.at(Transition::VD));

  for (int i = 0; i < kNumStates; ++i) {
    if (!(out.sojourn(i) > 0))
      throw DomainError("sojourn time of state " +
                        std::string(to_string(static_cast<State>(i))) +
                        " is not positive");
  }

  const Real denom = out.emc_pi.dot(out.sojourn);
  out.state_probs = out.emc_pi.cwiseProduct(out.sojourn) / denom;
  out.state_probs /= out.state_probs.sum();  // exact unit sum
  out.p_fail = out.state_probs(int(State::Failure));
  return out;
}

// --- file interface --------------------------------------------------------

SmpSpec load_smp_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open SMP spec file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("SMP spec '" + path + "': " + e.what());
  }
  SmpSpec spec;
  if (j.contains("time_unit")) spec.time_unit = j.at("time_unit").get<std::string>();
  if (!j.contains("transitions"))
    throw ParseError("SMP spec '" + path + "': missing 'transitions'");
  std::array<bool, kNumTransitions> seen{};
  for (auto it = j.at("transitions").begin(); it != j.at("transitions").end(); ++it) {
    const Transition t = transition_from_string(it.key());
    WeibullParams p;
    p.scale = it.value().at("scale").get<Real>();
    p.shape = it.value().at("shape").get<Real>();
    if (!p.valid())
      throw ValidationError("SMP transition " + it.key() +
                            ": scale and shape must be positive and finite");
    spec.at(t) = p;
    seen[static_cast<int>(t)] = true;
  }
  for (int i = 0; i < kNumTransitions; ++i) {
    if (!seen[i])
      throw ValidationError(std::string("SMP spec is missing transition ") +
                            to_string(static_cast<Transition>(i)));
  }
  return spec;
}

std::string smp_spec_to_json(const SmpSpec& spec) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["time_unit"] = spec.time_unit;
  for (int i = 0; i < kNumTransitions; ++i) {
    const auto t = static_cast<Transition>(i);
    j["transitions"][to_string(t)] = {{"scale", spec.at(t).scale},
                                      {"shape", spec.at(t).shape}};
  }
  return j.dump(2);
}

std::string smp_result_to_json(const SmpResult& r) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["convention"] = r.convention == SojournConvention::SurvivalProduct
                        ? "survival_product"
                        : "density_weighted";
  for (int i = 0; i < kNumTransitions; ++i)
    j["kernel_limits"][to_string(static_cast<Transition>(i))] = r.kernel_limits[i];
  for (int i = 0; i < kNumStates; ++i) {
    const char* s = to_string(static_cast<State>(i));
    j["emc_pi"][s] = r.emc_pi(i);
    j["sojourn_hours"][s] = r.sojourn(i);
    j["state_probs"][s] = r.state_probs(i);
  }
  j["p_fail"] = r.p_fail;
  return j.dump(2);
}

}  // namespace gridsure::smp
