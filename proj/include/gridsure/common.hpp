// SPDX-License-Identifier: Apache-2.0
#ifndef GRIDSURE_COMMON_HPP
#define GRIDSURE_COMMON_HPP

#include <stdexcept>
#include <string>

namespace gridsure {

/// Default scalar for the whole toolkit. Numeric kernels are templated on
/// their scalar; everything domain-facing instantiates this one.
using Real = double;

// ---------------------------------------------------------------------------
// Error taxonomy. Input/config problems and numeric failures are separated so
// the CLI can map them to distinct exit codes (2 vs 1).
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (bad syntax, missing keys, wrong types).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid model (non-radial topology, profile-length
/// mismatch, negative capacities, ...). Message names the offending entity.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Model data that cannot be turned into an optimization problem,
/// e.g. PV active generation exceeding its apparent-power capacity.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Argument outside a function's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature could not reach the requested error bound.
class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Distribution fitting rejected the sample set.
class FitError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// No feasible point exists; message carries the first violated constraint.
class InfeasibleError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Objective unbounded below; usually a tariff configuration error.
class UnboundedError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Branch-and-bound node cap reached before proving optimality.
class ExactnessLostError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Scenario sampler exceeded its redraw budget (inconsistent delta budgets).
class RejectionLimitError : public Error {
 public:
  using Error::Error;
};

/// Embedded Markov chain is reducible / has no unique stationary vector.
class SingularChainError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridsure

#endif  // GRIDSURE_COMMON_HPP
