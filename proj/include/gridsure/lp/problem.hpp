// SPDX-License-Identifier: Apache-2.0
//
// Problem container for linear programs with bounded variables, range
// constraints, optional binaries, and separable convex piecewise-linear
// objective terms. The solver expands piecewise terms into segment columns
// internally; the container keeps them symbolic so instances stay small and
// inspectable.
#ifndef GRIDSURE_LP_PROBLEM_HPP
#define GRIDSURE_LP_PROBLEM_HPP

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gridsure/common.hpp"

namespace gridsure::lp {

inline constexpr Real kInf = std::numeric_limits<Real>::infinity();

struct Variable {
  std::string name;
  Real lower = 0;
  Real upper = kInf;
  bool integral = false;
};

/// lower <= terms . x <= upper; equality when lower == upper.
struct ConstraintRow {
  std::string name;
  std::vector<std::pair<int, Real>> terms;
  Real lower = -kInf;
  Real upper = kInf;
};

/// Convex piecewise-linear cost attached to one variable. `breakpoints` has
/// K+1 ascending entries spanning the variable's bounds, `slopes` has K
/// non-decreasing entries; the cost is 0 at breakpoints.front() (constants
/// belong in objective_constant).
struct PiecewiseCost {
  int variable = -1;
  std::vector<Real> breakpoints;
  std::vector<Real> slopes;
};

struct LpProblem {
  std::vector<Variable> variables;
  std::vector<ConstraintRow> constraints;
  std::vector<std::pair<int, Real>> objective;  // sparse linear cost
  Real objective_constant = 0;
  std::vector<PiecewiseCost> piecewise_terms;

  int add_variable(std::string name, Real lower, Real upper, bool integral = false) {
    variables.push_back({std::move(name), lower, upper, integral});
    return static_cast<int>(variables.size()) - 1;
  }

  ConstraintRow& add_constraint(std::string name, Real lower, Real upper) {
    constraints.push_back({std::move(name), {}, lower, upper});
    return constraints.back();
  }

  void add_objective(int var, Real coef) {
    if (coef != 0) objective.emplace_back(var, coef);
  }

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }
};

/// Structural checks: every constraint/objective/piecewise index refers to a
/// declared variable, bounds are ordered, piecewise slopes are monotone
/// non-decreasing (convex epigraph). Throws ValidationError.
void validate(const LpProblem& problem);

/// Serialize to CPLEX-style LP text with piecewise terms expanded into
/// segment columns, for cross-checking against external solvers.
std::string to_lp_format(const LpProblem& problem);

}  // namespace gridsure::lp

#endif  // GRIDSURE_LP_PROBLEM_HPP
