// SPDX-License-Identifier: Apache-2.0
//
// Bounded-variable revised primal simplex with a sparse LU basis
// factorization (Eigen SparseLU) refreshed through product-form eta updates,
// plus a best-bound branch-and-bound layer for the binaries. Hidden behind
// the LpBackend interface so an external solver can be swapped in.
#ifndef GRIDSURE_LP_SOLVER_HPP
#define GRIDSURE_LP_SOLVER_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gridsure/lp/problem.hpp"

namespace gridsure::lp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit };

const char* to_string(SolveStatus s);

/// Opaque basis snapshot for warm starts. Only valid for a problem with the
/// same expanded shape as the one that produced it (checked via fingerprint).
struct Basis {
  std::vector<std::int8_t> status;  // per expanded column, then logicals
  std::uint64_t fingerprint = 0;

  bool empty() const { return status.empty(); }
};

struct SolveOptions {
  Real feas_tol = 1e-9;
  Real opt_tol = 1e-9;
  long max_iterations = 2000000;
  int refactor_interval = 120;
  bool relax_integrality = false;
  long max_nodes = 100000;        // branch-and-bound node cap
  Real integrality_tol = 1e-7;
  const Basis* warm_basis = nullptr;
};

struct LpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  Real objective = 0;              // piecewise-linear objective incl. constant
  std::vector<Real> values;        // per original problem variable
  Basis basis;                     // for warm restarts
  long iterations = 0;
  long nodes = 0;
  std::string detail;              // e.g. first violated constraint name
};

class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual LpSolution solve(const LpProblem& problem, const SolveOptions& options) = 0;
  virtual std::string name() const = 0;
};

/// The bundled revised-simplex backend.
std::unique_ptr<LpBackend> make_simplex_backend();

namespace basis_status {
inline constexpr std::int8_t kAtLower = 0;
inline constexpr std::int8_t kAtUpper = 1;
inline constexpr std::int8_t kBasic = 2;
inline constexpr std::int8_t kFree = 3;
}  // namespace basis_status

/// Assemble a warm-start basis from per-variable and per-row logical
/// statuses. Variables expanded into piecewise segments cannot be basic
/// (their segments start at lower bounds). The basic count must equal the
/// row count; otherwise the solver falls back to a cold start.
Basis build_basis(const LpProblem& problem,
                  const std::vector<std::int8_t>& variable_status,
                  const std::vector<std::int8_t>& row_status);

/// Convenience entry point using the bundled backend. Throws
/// InfeasibleError / UnboundedError / ExactnessLostError on those outcomes;
/// returns only optimal solutions.
LpSolution solve(const LpProblem& problem, const SolveOptions& options = {});

/// Same but returns the status instead of throwing (callers that expect
/// infeasibility, e.g. Monte Carlo scenario solves).
LpSolution solve_no_throw(const LpProblem& problem, const SolveOptions& options = {});

}  // namespace gridsure::lp

#endif  // GRIDSURE_LP_SOLVER_HPP
