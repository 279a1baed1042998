// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive vertex-enumeration oracle for tiny LPs (all variables boxed, so
// a feasible problem has an optimal vertex and every vertex solves a square
// active-constraint system). Exponential and proud of it.
#ifndef GRIDSURE_TESTS_LP_ORACLE_HPP
#define GRIDSURE_TESTS_LP_ORACLE_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace gridsure::tests {

struct TinyLp {
  Eigen::MatrixXd A;       // m x n
  Eigen::VectorXd row_lo, row_hi;
  Eigen::VectorXd col_lo, col_hi;  // finite
  Eigen::VectorXd cost;
};

struct TinyLpResult {
  double objective;
  Eigen::VectorXd x;
};

inline std::optional<TinyLpResult> brute_force_lp(const TinyLp& lp) {
  const int n = static_cast<int>(lp.cost.size());
  const int m = static_cast<int>(lp.A.rows());

  // candidate hyperplanes: (normal, offset)
  std::vector<std::pair<Eigen::RowVectorXd, double>> planes;
  for (int r = 0; r < m; ++r) {
    planes.push_back({lp.A.row(r), lp.row_lo[r]});
    if (lp.row_hi[r] != lp.row_lo[r]) planes.push_back({lp.A.row(r), lp.row_hi[r]});
  }
  for (int j = 0; j < n; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e[j] = 1.0;
    planes.push_back({e, lp.col_lo[j]});
    if (lp.col_hi[j] != lp.col_lo[j]) planes.push_back({e, lp.col_hi[j]});
  }

  const int np = static_cast<int>(planes.size());
  std::vector<int> pick(n, 0);
  std::optional<TinyLpResult> best;

  auto feasible = [&](const Eigen::VectorXd& x) {
    const double tol = 1e-7;
    for (int j = 0; j < n; ++j)
      if (x[j] < lp.col_lo[j] - tol || x[j] > lp.col_hi[j] + tol) return false;
    const Eigen::VectorXd act = lp.A * x;
    for (int r = 0; r < m; ++r)
      if (act[r] < lp.row_lo[r] - tol || act[r] > lp.row_hi[r] + tol) return false;
    return true;
  };

  // iterate over all n-subsets of planes
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (np < n) return std::nullopt;
  for (;;) {
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      M.row(i) = planes[idx[i]].first;
      b[i] = planes[idx[i]].second;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(b);
      if (feasible(x)) {
        const double obj = lp.cost.dot(x);
        if (!best || obj < best->objective - 1e-12) best = TinyLpResult{obj, x};
      }
    }
    // next combination
    int i = n - 1;
    while (i >= 0 && idx[i] == np - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int k = i + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
  return best;
}

}  // namespace gridsure::tests

#endif  // GRIDSURE_TESTS_LP_ORACLE_HPP
