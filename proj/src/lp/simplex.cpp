// SPDX-License-Identifier: Apache-2.0
//
// Revised primal simplex for bounded variables with range rows, composite
// (phase-1-in-the-loop) infeasibility handling, product-form eta updates on
// top of a periodically refreshed Eigen SparseLU factorization, and a
// best-bound branch-and-bound driver for binaries.
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <sstream>

#include "gridsure/lp/solver.hpp"

namespace gridsure::lp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NodeLimit: return "node_limit";
  }
  return "?";
}

namespace {

constexpr std::int8_t kAtLower = 0;
constexpr std::int8_t kAtUpper = 1;
constexpr std::int8_t kBasic = 2;
constexpr std::int8_t kFreeNb = 3;

using SpMat = Eigen::SparseMatrix<Real>;
using DVec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Expanded problem: piecewise costs replaced by segment columns, logicals
// appended conceptually (column n + r is -e_r).
// ---------------------------------------------------------------------------
struct LoadedLp {
  int m = 0;
  int n = 0;  // structural (expanded) columns
  std::vector<Real> lo, hi, cost;                        // size n
  std::vector<std::vector<std::pair<int, Real>>> cols;   // size n
  std::vector<Real> row_lo, row_hi;                      // size m
  std::vector<int> col_orig;                             // expanded -> original
  std::vector<Real> orig_base;                           // per original variable
  std::vector<int> orig_first, orig_count;               // original -> slice
  std::vector<int> integral_cols;
  Real objective_constant = 0;
  const LpProblem* src = nullptr;
  std::uint64_t fingerprint = 0;

  int total_cols() const { return n + m; }

  Real col_lo(int j) const { return j < n ? lo[j] : row_lo[j - n]; }
  Real col_hi(int j) const { return j < n ? hi[j] : row_hi[j - n]; }
};

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

LoadedLp load(const LpProblem& p) {
  validate(p);
  LoadedLp L;
  L.src = &p;
  L.m = p.num_constraints();
  L.row_lo.resize(L.m);
  L.row_hi.resize(L.m);
  for (int r = 0; r < L.m; ++r) {
    L.row_lo[r] = p.constraints[r].lower;
    L.row_hi[r] = p.constraints[r].upper;
  }

  const int nv = p.num_variables();
  std::vector<const PiecewiseCost*> pw(nv, nullptr);
  for (const auto& term : p.piecewise_terms) pw[term.variable] = &term;

  std::vector<Real> lin_cost(nv, 0);
  for (const auto& [v, c] : p.objective) lin_cost[v] += c;

  // column-major copy of the constraint matrix
  std::vector<std::vector<std::pair<int, Real>>> var_cols(nv);
  for (int r = 0; r < L.m; ++r)
    for (const auto& [v, a] : p.constraints[r].terms)
      if (a != 0) var_cols[v].emplace_back(r, a);

  L.orig_base.assign(nv, 0);
  L.orig_first.assign(nv, -1);
  L.orig_count.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    const Variable& var = p.variables[v];
    L.orig_first[v] = L.n;
    if (pw[v] == nullptr) {
      L.orig_count[v] = 1;
      L.lo.push_back(var.lower);
      L.hi.push_back(var.upper);
      L.cost.push_back(lin_cost[v]);
      L.cols.push_back(var_cols[v]);
      L.col_orig.push_back(v);
      if (var.integral) L.integral_cols.push_back(L.n);
      ++L.n;
      continue;
    }
    const auto& t = *pw[v];
    const int segs = static_cast<int>(t.slopes.size());
    const Real base = t.breakpoints.front();
    L.orig_base[v] = base;
    L.orig_count[v] = segs;
    L.objective_constant += lin_cost[v] * base;
    if (base != 0) {
      for (const auto& [r, a] : var_cols[v]) {
        L.row_lo[r] -= a * base;
        L.row_hi[r] -= a * base;
      }
    }
    for (int k = 0; k < segs; ++k) {
      L.lo.push_back(0);
      L.hi.push_back(t.breakpoints[k + 1] - t.breakpoints[k]);
      L.cost.push_back(t.slopes[k] + lin_cost[v]);
      L.cols.push_back(var_cols[v]);
      L.col_orig.push_back(v);
      ++L.n;
    }
  }
  L.objective_constant += p.objective_constant;

  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = mix(h, std::uint64_t(L.m));
  h = mix(h, std::uint64_t(L.n));
  std::uint64_t nnz = 0;
  for (const auto& c : L.cols) nnz += c.size();
  h = mix(h, nnz);
  h = mix(h, std::uint64_t(L.integral_cols.size()));
  L.fingerprint = h;
  return L;
}

// ---------------------------------------------------------------------------
// Core simplex on a LoadedLp with optional per-column bound overrides.
// ---------------------------------------------------------------------------
class Simplex {
 public:
  Simplex(const LoadedLp& L, const SolveOptions& opt) : L_(L), opt_(opt) {
    const int N = L_.total_cols();
    work_lo_.resize(N);
    work_hi_.resize(N);
    for (int j = 0; j < N; ++j) {
      work_lo_[j] = L_.col_lo(j);
      work_hi_[j] = L_.col_hi(j);
    }
    x_.assign(N, 0);
    status_.assign(N, kAtLower);
    pos_.assign(N, -1);
  }

  void set_bounds(int col, Real lo, Real hi) {
    work_lo_[col] = lo;
    work_hi_[col] = hi;
  }

  SolveStatus run(const Basis* warm) {
    setup_statuses(warm);
    if (!refactor()) {
      // fall back to the all-logical basis if the warm basis is singular
      setup_statuses(nullptr);
      if (!refactor()) throw SolverError("logical basis failed to factorize");
    }
    recompute_basics();
    return iterate();
  }

  Real objective() const {
    Real obj = L_.objective_constant;
    for (int j = 0; j < L_.n; ++j) obj += L_.cost[j] * x_[j];
    return obj;
  }

  const std::vector<Real>& expanded_values() const { return x_; }

  Basis extract_basis() const {
    Basis b;
    b.status = status_;
    b.fingerprint = L_.fingerprint;
    return b;
  }

  long iterations() const { return iterations_; }

  std::string infeasibility_detail() const {
    int worst = -1;
    Real worst_v = 0;
    for (int k = 0; k < L_.m; ++k) {
      const int j = basic_[k];
      const Real v = violation(j);
      if (v > worst_v) {
        worst_v = v;
        worst = j;
      }
    }
    if (worst < 0) return "infeasible";
    std::ostringstream os;
    os << "violated constraint: " << column_name(worst) << " (value " << x_[worst]
       << ", bounds [" << work_lo_[worst] << ", " << work_hi_[worst]
       << "], violation " << worst_v << ")";
    return os.str();
  }

 private:
  std::string column_name(int j) const {
    if (j >= L_.n) return L_.src->constraints[j - L_.n].name;
    const int v = L_.col_orig[j];
    std::string name = L_.src->variables[v].name;
    if (L_.orig_count[v] > 1)
      name += "#seg" + std::to_string(j - L_.orig_first[v]);
    return name;
  }

  Real feas_tol(int j) const {
    Real scale = 1;
    if (work_lo_[j] != -kInf) scale = std::max(scale, std::abs(work_lo_[j]));
    if (work_hi_[j] != kInf) scale = std::max(scale, std::abs(work_hi_[j]));
    return opt_.feas_tol * scale;
  }

  Real violation(int j) const {
    const Real t = feas_tol(j);
    if (x_[j] < work_lo_[j] - t) return work_lo_[j] - x_[j];
    if (x_[j] > work_hi_[j] + t) return x_[j] - work_hi_[j];
    return 0;
  }

  void setup_statuses(const Basis* warm) {
    const int N = L_.total_cols();
    basic_.clear();
    std::fill(pos_.begin(), pos_.end(), -1);
    etas_.clear();
    bool used_warm = false;
    if (warm != nullptr && !warm->empty() &&
        warm->fingerprint == L_.fingerprint &&
        static_cast<int>(warm->status.size()) == N) {
      int nb = 0;
      for (int j = 0; j < N; ++j)
        if (warm->status[j] == kBasic) ++nb;
      if (nb == L_.m) {
        status_ = warm->status;
        used_warm = true;
      }
    }
    if (!used_warm) {
      for (int j = 0; j < L_.n; ++j) status_[j] = nonbasic_default(j);
      for (int r = 0; r < L_.m; ++r) status_[L_.n + r] = kBasic;
    }
    for (int j = 0; j < N; ++j) {
      if (status_[j] == kBasic) {
        pos_[j] = static_cast<int>(basic_.size());
        basic_.push_back(j);
      } else {
        set_nonbasic_value(j);
      }
    }
  }

  std::int8_t nonbasic_default(int j) const {
    const Real lo = work_lo_[j], hi = work_hi_[j];
    if (lo == -kInf && hi == kInf) return kFreeNb;
    if (lo == -kInf) return kAtUpper;
    if (hi == kInf) return kAtLower;
    return std::abs(lo) <= std::abs(hi) ? kAtLower : kAtUpper;
  }

  void set_nonbasic_value(int j) {
    switch (status_[j]) {
      case kAtLower: x_[j] = work_lo_[j]; break;
      case kAtUpper: x_[j] = work_hi_[j]; break;
      case kFreeNb: x_[j] = 0; break;
      default: break;
    }
    // a warm basis may carry a bound status that no longer exists
    if (status_[j] == kAtLower && work_lo_[j] == -kInf) {
      status_[j] = work_hi_[j] == kInf ? kFreeNb : kAtUpper;
      set_nonbasic_value(j);
    } else if (status_[j] == kAtUpper && work_hi_[j] == kInf) {
      status_[j] = work_lo_[j] == -kInf ? kFreeNb : kAtLower;
      set_nonbasic_value(j);
    }
  }

  // --- factorization ------------------------------------------------------

  bool refactor() {
    etas_.clear();
    if (L_.m == 0) return true;  // row-free problem: pure bound optimization
    std::vector<Eigen::Triplet<Real>> trips;
    for (int k = 0; k < L_.m; ++k) {
      const int j = basic_[k];
      if (j >= L_.n) {
        trips.emplace_back(j - L_.n, k, Real(-1));
      } else {
        for (const auto& [r, a] : L_.cols[j]) trips.emplace_back(r, k, a);
      }
    }
    SpMat B(L_.m, L_.m);
    B.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(B);
    return lu_.info() == Eigen::Success;
  }

  DVec ftran(DVec v) const {
    if (L_.m == 0) return v;
    DVec x = lu_.solve(v);
    for (const auto& e : etas_) {
      const Real xp = x[e.p] / e.wp;
      x[e.p] = xp;
      if (xp != 0)
        for (const auto& [i, w] : e.rest) x[i] -= w * xp;
    }
    return x;
  }

  DVec btran(DVec c) const {
    if (L_.m == 0) return c;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      Real dot = 0;
      for (const auto& [i, w] : it->rest) dot += w * c[i];
      c[it->p] = (c[it->p] - dot) / it->wp;
    }
    return lu_.transpose().solve(c);
  }

  DVec column_dense(int j) const {
    DVec a = DVec::Zero(L_.m);
    if (j >= L_.n) {
      a[j - L_.n] = -1;
    } else {
      // accumulate: a row may legally mention the same variable twice
      for (const auto& [r, v] : L_.cols[j]) a[r] += v;
    }
    return a;
  }

  void recompute_basics() {
    DVec rhs = DVec::Zero(L_.m);
    for (int j = 0; j < L_.total_cols(); ++j) {
      if (status_[j] == kBasic || x_[j] == 0) continue;
      if (j >= L_.n) {
        rhs[j - L_.n] += x_[j];
      } else {
        for (const auto& [r, a] : L_.cols[j]) rhs[r] -= a * x_[j];
      }
    }
    DVec xb = ftran(rhs);
    for (int k = 0; k < L_.m; ++k) x_[basic_[k]] = xb[k];
  }

  // --- pricing ------------------------------------------------------------

  Real reduced_cost(int j, const DVec& y, const std::vector<Real>& cost) const {
    Real d = j < L_.n ? cost[j] : 0;
    if (j >= L_.n) {
      d += y[j - L_.n];  // column is -e_r
    } else {
      for (const auto& [r, a] : L_.cols[j]) d -= y[r] * a;
    }
    return d;
  }

  // entering candidate: returns column or -1; sets direction
  int price(const DVec& y, const std::vector<Real>& cost, bool bland, int& dir) const {
    int best = -1;
    Real best_score = opt_.opt_tol;
    int best_dir = +1;
    const int N = L_.total_cols();
    for (int j = 0; j < N; ++j) {
      const std::int8_t st = status_[j];
      if (st == kBasic) continue;
      if (work_lo_[j] == work_hi_[j]) continue;  // fixed
      const Real d = reduced_cost(j, y, cost);
      Real score = 0;
      int s = 0;
      if (st == kAtLower && d < -opt_.opt_tol) {
        score = -d;
        s = +1;
      } else if (st == kAtUpper && d > opt_.opt_tol) {
        score = d;
        s = -1;
      } else if (st == kFreeNb && std::abs(d) > opt_.opt_tol) {
        score = std::abs(d);
        s = d < 0 ? +1 : -1;
      } else {
        continue;
      }
      if (bland) {
        dir = s;
        return j;  // least index wins
      }
      if (score > best_score) {
        best_score = score;
        best = j;
        best_dir = s;
      }
    }
    dir = best_dir;
    return best;
  }

  // --- main loop ----------------------------------------------------------

  SolveStatus iterate() {
    long stall = 0;
    Real last_progress_metric = std::numeric_limits<Real>::infinity();
    bool bland = false;
    bool was_phase1 = true;
    std::vector<Real> phase_cost(L_.n, 0);

    for (iterations_ = 0; iterations_ < opt_.max_iterations; ++iterations_) {
      // classify
      Real total_infeas = 0;
      for (int k = 0; k < L_.m; ++k) total_infeas += violation(basic_[k]);
      const bool phase1 = total_infeas > 0;

      // stall tracking; the metric changes meaning across the phase switch
      if (phase1 != was_phase1) {
        last_progress_metric = std::numeric_limits<Real>::infinity();
        stall = 0;
        bland = false;
        was_phase1 = phase1;
      }
      const Real metric = phase1 ? total_infeas : objective();
      if (metric < last_progress_metric - 1e-13 * (1 + std::abs(metric))) {
        last_progress_metric = metric;
        stall = 0;
        bland = false;
      } else if (++stall > 2000) {
        bland = true;
      }

      DVec cb(L_.m);
      if (phase1) {
        for (int k = 0; k < L_.m; ++k) {
          const int j = basic_[k];
          const Real t = feas_tol(j);
          if (x_[j] < work_lo_[j] - t)
            cb[k] = -1;
          else if (x_[j] > work_hi_[j] + t)
            cb[k] = 1;
          else
            cb[k] = 0;
        }
      } else {
        for (int k = 0; k < L_.m; ++k)
          cb[k] = basic_[k] < L_.n ? L_.cost[basic_[k]] : 0;
      }
      DVec y = btran(cb);

      int dir = +1;
      const int q = price(y, phase1 ? phase_cost : L_.cost, bland, dir);
      if (q < 0) {
        if (phase1) return SolveStatus::Infeasible;
        return SolveStatus::Optimal;
      }

      DVec w = ftran(column_dense(q));

      const StepResult step =
          phase1 ? ratio_test_phase1(q, dir, w) : ratio_test_phase2(q, dir, w);
      if (step.unbounded) {
        if (phase1)
          throw SolverError("phase-1 descent unbounded (numerical failure)");
        return SolveStatus::Unbounded;
      }

      apply_step(q, dir, w, step);

      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!refactor()) throw SolverError("basis refactorization failed");
        recompute_basics();
      }
    }
    return SolveStatus::IterationLimit;
  }

  struct StepResult {
    Real t = 0;
    int leaving_pos = -1;   // basis position, -1 for bound flip
    std::int8_t leave_to = kAtLower;
    bool flip = false;
    bool unbounded = false;
  };

  static constexpr Real kPivotTol = 1e-11;

  StepResult ratio_test_phase2(int q, int dir, const DVec& w) const {
    StepResult res;
    const bool has_own = work_lo_[q] > -kInf && work_hi_[q] < kInf;
    const Real t_own = has_own ? work_hi_[q] - work_lo_[q] : kInf;

    auto blocker = [&](int k, Real& t_hit, std::int8_t& to) {
      if (std::abs(w[k]) <= kPivotTol) return false;
      const int j = basic_[k];
      const Real a = -Real(dir) * w[k];  // dx_j / dt
      if (a > 0) {
        if (work_hi_[j] == kInf) return false;
        t_hit = (work_hi_[j] - x_[j]) / a;
        to = kAtUpper;
      } else {
        if (work_lo_[j] == -kInf) return false;
        t_hit = (work_lo_[j] - x_[j]) / a;
        to = kAtLower;
      }
      if (t_hit < 0) t_hit = 0;
      return true;
    };

    // pass 1: shortest step
    Real t_min = t_own;
    for (int k = 0; k < L_.m; ++k) {
      Real t_hit;
      std::int8_t to;
      if (blocker(k, t_hit, to)) t_min = std::min(t_min, t_hit);
    }
    if (t_min == kInf) {
      res.unbounded = true;
      return res;
    }
    // pass 2: among ties, prefer the entering variable's own bound (flip is
    // cheaper and equally valid), otherwise the largest pivot magnitude
    const Real tie = t_min + 1e-9 * (1 + t_min);
    if (t_own <= tie) {
      res.flip = true;
      res.t = t_own;
      return res;
    }
    int leave = -1;
    std::int8_t leave_to = kAtLower;
    Real best_pivot = -1;
    for (int k = 0; k < L_.m; ++k) {
      Real t_hit;
      std::int8_t to;
      if (!blocker(k, t_hit, to) || t_hit > tie) continue;
      if (std::abs(w[k]) > best_pivot) {
        best_pivot = std::abs(w[k]);
        leave = k;
        leave_to = to;
      }
    }
    res.t = t_min;
    res.leaving_pos = leave;
    res.leave_to = leave_to;
    return res;
  }

  // Long-step composite phase-1 ratio test: basic variables may pass through
  // bounds while the total infeasibility keeps strictly decreasing.
  StepResult ratio_test_phase1(int q, int dir, const DVec& w) const {
    struct Event {
      Real t;
      Real slope_delta;
      int pos;            // basis position, -1 for entering's own bound
      std::int8_t to;
      Real pivot_mag;
    };
    std::vector<Event> events;
    Real slope = 0;

    for (int k = 0; k < L_.m; ++k) {
      if (std::abs(w[k]) <= kPivotTol) continue;
      const int j = basic_[k];
      const Real a = -Real(dir) * w[k];
      const Real tol = feas_tol(j);
      const Real mag = std::abs(w[k]);
      if (x_[j] < work_lo_[j] - tol) {
        slope -= a;  // current contribution d(l - x)/dt = -a
        if (a > 0) {
          events.push_back({(work_lo_[j] - x_[j]) / a, a, k, kAtLower, mag});
          if (work_hi_[j] < kInf)
            events.push_back({(work_hi_[j] - x_[j]) / a, a, k, kAtUpper, mag});
        }
      } else if (x_[j] > work_hi_[j] + tol) {
        slope += a;
        if (a < 0) {
          events.push_back({(work_hi_[j] - x_[j]) / a, -a, k, kAtUpper, mag});
          if (work_lo_[j] > -kInf)
            events.push_back({(work_lo_[j] - x_[j]) / a, -a, k, kAtLower, mag});
        }
      } else {
        if (a > 0 && work_hi_[j] < kInf)
          events.push_back({std::max(Real(0), (work_hi_[j] - x_[j]) / a), a, k,
                            kAtUpper, mag});
        else if (a < 0 && work_lo_[j] > -kInf)
          events.push_back({std::max(Real(0), (work_lo_[j] - x_[j]) / a), -a, k,
                            kAtLower, mag});
      }
    }

    StepResult res;
    if (slope >= 0) {
      // numerical disagreement with pricing; force a degenerate step on the
      // nearest event to keep making basis progress
      slope = -opt_.opt_tol;
    }

    if (work_lo_[q] > -kInf && work_hi_[q] < kInf)
      events.push_back({work_hi_[q] - work_lo_[q], kInf, -1, kAtUpper, 0});

    if (events.empty()) {
      res.unbounded = true;
      return res;
    }
    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.t < b.t; });

    std::size_t i = 0;
    while (i < events.size()) {
      // group events at (numerically) the same step length
      const Real t0 = events[i].t;
      std::size_t jmax = i;
      Real group_delta = 0;
      Real best_mag = -1;
      std::size_t best_idx = i;
      bool own_bound = false;
      while (jmax < events.size() && events[jmax].t <= t0 + 1e-12 * (1 + t0)) {
        group_delta += events[jmax].slope_delta == kInf ? 0 : events[jmax].slope_delta;
        if (events[jmax].pos == -1)
          own_bound = true;
        else if (events[jmax].pivot_mag > best_mag) {
          best_mag = events[jmax].pivot_mag;
          best_idx = jmax;
        }
        ++jmax;
      }
      if (own_bound || slope + group_delta >= -1e-13) {
        res.t = t0;
        if (own_bound && best_mag < 0) {
          res.flip = true;
        } else if (own_bound) {
          // both the entering bound and a basic bound stop here; flipping is
          // the cheaper, equally valid choice
          res.flip = true;
        } else {
          res.leaving_pos = events[best_idx].pos;
          res.leave_to = events[best_idx].to;
        }
        return res;
      }
      slope += group_delta;
      i = jmax;
    }
    res.unbounded = true;
    return res;
  }

  void apply_step(int q, int dir, const DVec& w, const StepResult& step) {
    const Real t = step.t;
    if (t != 0) {
      for (int k = 0; k < L_.m; ++k) {
        if (w[k] == 0) continue;
        x_[basic_[k]] -= Real(dir) * w[k] * t;
      }
    }
    if (step.flip) {
      // entering travels to its opposite bound; basis unchanged
      status_[q] = status_[q] == kAtUpper ? kAtLower : kAtUpper;
      x_[q] = status_[q] == kAtUpper ? work_hi_[q] : work_lo_[q];
      return;
    }
    const int p = step.leaving_pos;
    const int leave = basic_[p];
    // entering value
    const Real start = status_[q] == kAtUpper  ? work_hi_[q]
                       : status_[q] == kFreeNb ? Real(0)
                                               : work_lo_[q];
    x_[q] = start + Real(dir) * t;
    // leaver snaps to the bound it hit
    x_[leave] = step.leave_to == kAtUpper ? work_hi_[leave] : work_lo_[leave];
    status_[leave] = step.leave_to;
    status_[q] = kBasic;
    pos_[leave] = -1;
    pos_[q] = p;
    basic_[p] = q;

    Eta e;
    e.p = p;
    e.wp = w[p];
    for (int k = 0; k < L_.m; ++k)
      if (k != p && w[k] != 0) e.rest.emplace_back(k, w[k]);
    if (std::abs(e.wp) < 1e-9) {
      // unstable eta; refresh the factorization instead of stacking it
      etas_.push_back(std::move(e));
      if (!refactor()) throw SolverError("basis refactorization failed");
      recompute_basics();
      return;
    }
    etas_.push_back(std::move(e));
  }

  struct Eta {
    int p;
    Real wp;
    std::vector<std::pair<int, Real>> rest;
  };

  const LoadedLp& L_;
  const SolveOptions& opt_;
  std::vector<Real> work_lo_, work_hi_;
  std::vector<Real> x_;
  std::vector<std::int8_t> status_;
  std::vector<int> pos_;
  std::vector<int> basic_;
  std::vector<Eta> etas_;
  // SparseLU::transpose() is a non-const view even for const solves
  mutable Eigen::SparseLU<SpMat> lu_;
  long iterations_ = 0;
};

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct BoundFix {
  int col;
  Real lo, hi;
};

struct LpRun {
  SolveStatus status;
  Real objective = 0;
  std::vector<Real> expanded;
  Basis basis;
  long iterations = 0;
  std::string detail;
};

LpRun run_lp(const LoadedLp& L, const SolveOptions& opt,
             const std::vector<BoundFix>& fixes, const Basis* warm) {
  Simplex s(L, opt);
  for (const auto& f : fixes) s.set_bounds(f.col, f.lo, f.hi);
  LpRun out;
  out.status = s.run(warm);
  out.iterations = s.iterations();
  if (out.status == SolveStatus::Optimal) {
    out.objective = s.objective();
    out.expanded = s.expanded_values();
    out.basis = s.extract_basis();
  } else if (out.status == SolveStatus::Infeasible) {
    out.detail = s.infeasibility_detail();
  }
  return out;
}

bool integral_enough(const LoadedLp& L, const std::vector<Real>& x, Real tol,
                     int& worst_col, Real& worst_frac) {
  worst_col = -1;
  worst_frac = 0;
  for (int j : L.integral_cols) {
    const Real f = std::abs(x[j] - std::round(x[j]));
    if (f > tol && f > worst_frac) {
      worst_frac = f;
      worst_col = j;
    }
  }
  return worst_col < 0;
}

// Rounding repair: if snapping every fractional binary to an integer keeps
// all rows and bounds satisfied, the LP bound is attained by an integral
// point and no branching is needed.典型 case: the charge/discharge mode
// indicator is fractional while both flows are zero.
bool try_rounding_repair(const LoadedLp& L, const SolveOptions& opt,
                         std::vector<Real>& x) {
  std::vector<Real> trial = x;
  for (int j : L.integral_cols) {
    const Real r = std::round(trial[j]);
    const Real f = std::abs(trial[j] - r);
    if (f <= opt.integrality_tol) {
      trial[j] = r;
      continue;
    }
    // pick the direction that stays within this column's bounds; the row
    // check below arbitrates everything else
    Real cand = std::floor(trial[j]);
    if (cand < L.col_lo(j) - opt.integrality_tol) cand = std::ceil(trial[j]);
    trial[j] = cand;
  }
  // objective must not change (all integral columns must be cost-free for
  // the repair to preserve optimality)
  for (int j : L.integral_cols)
    if (L.cost[j] != 0 && std::abs(trial[j] - x[j]) > opt.integrality_tol)
      return false;
  // feasibility of all rows at 1e-7 scale tolerance
  std::vector<Real> act(L.m, 0);
  for (int j = 0; j < L.n; ++j) {
    if (trial[j] == 0) continue;
    for (const auto& [r, a] : L.cols[j]) act[r] += a * trial[j];
  }
  for (int r = 0; r < L.m; ++r) {
    const Real tol = 1e-7 * std::max(Real(1), std::abs(act[r]));
    if (act[r] < L.row_lo[r] - tol || act[r] > L.row_hi[r] + tol) return false;
  }
  for (int j = 0; j < L.n; ++j) {
    const Real tol = 1e-7 * std::max(Real(1), std::abs(trial[j]));
    if (trial[j] < L.col_lo(j) - tol || trial[j] > L.col_hi(j) + tol)
      return false;
  }
  // keep logical values consistent with the snapped binaries
  for (int r = 0; r < L.m; ++r) trial[L.n + r] = act[r];
  x = std::move(trial);
  return true;
}

class SimplexBackend : public LpBackend {
 public:
  std::string name() const override { return "gridsure-simplex"; }

  LpSolution solve(const LpProblem& problem, const SolveOptions& opt) override {
    const LoadedLp L = load(problem);
    LpSolution sol;

    const bool mip = !L.integral_cols.empty() && !opt.relax_integrality;

    LpRun root = run_lp(L, opt, {}, opt.warm_basis);
    sol.iterations = root.iterations;
    if (root.status != SolveStatus::Optimal) {
      sol.status = root.status;
      sol.detail = root.detail;
      return sol;
    }

    if (!mip) {
      finish(L, root, sol);
      return sol;
    }

    int frac_col;
    Real frac;
    if (integral_enough(L, root.expanded, opt.integrality_tol, frac_col, frac) ||
        try_rounding_repair(L, opt, root.expanded)) {
      finish(L, root, sol);
      return sol;
    }

    // best-bound search
    struct Node {
      Real bound;
      std::vector<BoundFix> fixes;
      Basis basis;
      bool operator<(const Node& o) const { return bound > o.bound; }
    };
    std::priority_queue<Node> queue;
    queue.push({root.objective, {}, root.basis});

    Real incumbent_obj = kInf;
    LpRun incumbent;
    long nodes = 0;

    while (!queue.empty()) {
      Node node = queue.top();
      queue.pop();
      if (node.bound >= incumbent_obj - 1e-9 * (1 + std::abs(incumbent_obj)))
        break;  // best-bound: nothing better remains
      if (++nodes > opt.max_nodes)
        throw ExactnessLostError("branch-and-bound node cap (" +
                                 std::to_string(opt.max_nodes) + ") reached");

      LpRun run = run_lp(L, opt, node.fixes, node.basis.empty() ? nullptr : &node.basis);
      sol.iterations += run.iterations;
      if (run.status == SolveStatus::Unbounded) {
        sol.status = SolveStatus::Unbounded;
        return sol;
      }
      if (run.status != SolveStatus::Optimal) continue;  // infeasible: prune
      if (run.objective >= incumbent_obj - 1e-9 * (1 + std::abs(incumbent_obj)))
        continue;

      if (integral_enough(L, run.expanded, opt.integrality_tol, frac_col, frac) ||
          try_rounding_repair(L, opt, run.expanded)) {
        incumbent_obj = run.objective;
        incumbent = std::move(run);
        continue;
      }

      for (int side = 0; side < 2; ++side) {
        Node child;
        child.bound = run.objective;
        child.fixes = node.fixes;
        const Real v = run.expanded[frac_col];
        if (side == 0)
          child.fixes.push_back({frac_col, L.col_lo(frac_col), std::floor(v)});
        else
          child.fixes.push_back({frac_col, std::ceil(v), L.col_hi(frac_col)});
        child.basis = run.basis;
        queue.push(std::move(child));
      }
    }
    sol.nodes = nodes;
    if (incumbent_obj == kInf) {
      sol.status = SolveStatus::Infeasible;
      sol.detail = "no integral solution found";
      return sol;
    }
    finish(L, incumbent, sol);
    return sol;
  }

 private:
  static void finish(const LoadedLp& L, const LpRun& run, LpSolution& sol) {
    sol.status = SolveStatus::Optimal;
    sol.objective = run.objective;
    sol.basis = run.basis;
    sol.values.assign(L.src->num_variables(), 0);
    for (int v = 0; v < L.src->num_variables(); ++v) {
      Real acc = L.orig_base[v];
      for (int k = 0; k < L.orig_count[v]; ++k) acc += run.expanded[L.orig_first[v] + k];
      sol.values[v] = acc;
    }
  }
};

}  // namespace

std::unique_ptr<LpBackend> make_simplex_backend() {
  return std::make_unique<SimplexBackend>();
}

Basis build_basis(const LpProblem& problem,
                  const std::vector<std::int8_t>& variable_status,
                  const std::vector<std::int8_t>& row_status) {
  const LoadedLp L = load(problem);
  if (variable_status.size() != static_cast<std::size_t>(problem.num_variables()) ||
      row_status.size() != static_cast<std::size_t>(problem.num_constraints()))
    throw ValidationError("build_basis: status vector sizes do not match the problem");
  Basis b;
  b.fingerprint = L.fingerprint;
  b.status.assign(L.total_cols(), kAtLower);
  for (int v = 0; v < problem.num_variables(); ++v) {
    const std::int8_t st = variable_status[v];
    if (L.orig_count[v] > 1) {
      if (st == kBasic)
        throw ValidationError("build_basis: piecewise variable " +
                              problem.variables[v].name + " cannot be basic");
      for (int k = 0; k < L.orig_count[v]; ++k)
        b.status[L.orig_first[v] + k] = kAtLower;
      continue;
    }
    b.status[L.orig_first[v]] = st;
  }
  for (int r = 0; r < L.m; ++r) b.status[L.n + r] = row_status[r];
  return b;
}

LpSolution solve_no_throw(const LpProblem& problem, const SolveOptions& options) {
  SimplexBackend backend;
  return backend.solve(problem, options);
}

LpSolution solve(const LpProblem& problem, const SolveOptions& options) {
  LpSolution sol = solve_no_throw(problem, options);
  switch (sol.status) {
    case SolveStatus::Optimal: return sol;
    case SolveStatus::Infeasible: throw InfeasibleError(sol.detail.empty() ? "infeasible" : sol.detail);
    case SolveStatus::Unbounded:
      throw UnboundedError("objective unbounded below (check sell/buy prices and loss factors)");
    case SolveStatus::IterationLimit:
      throw SolverError("simplex iteration limit reached");
    case SolveStatus::NodeLimit:
      throw ExactnessLostError("branch-and-bound node cap reached");
  }
  throw SolverError("unknown solver status");
}

}  // namespace gridsure::lp
