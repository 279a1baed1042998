// SPDX-License-Identifier: Apache-2.0
#include "gridsure/scenario/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gridsure/numerics/rng.hpp"

namespace gridsure::scenario {

using grid::NetworkModel;
using numerics::SplitRng;

const char* to_string(ScenarioLabel label) {
  switch (label) {
    case ScenarioLabel::Sampled: return "sampled";
    case ScenarioLabel::WorstCase: return "worst_case";
    case ScenarioLabel::Manual: return "manual";
  }
  return "?";
}

ScenarioCheck check_scenario(const NetworkModel& model, const LoadScenario& s) {
  ScenarioCheck out;
  const Eigen::ArrayXXd dp = grid::demand_p_matrix(model);
  const Eigen::ArrayXXd dq = grid::demand_q_matrix(model);
  const Real delta = model.policy.delta_bus;
  const Real Delta = model.policy.delta_system;
  const Real tol = 1e-9;
  auto fail = [&](const std::string& msg) {
    out.ok = false;
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += msg;
  };
  if (s.var_p.rows() != dp.rows() || s.var_p.cols() != dp.cols() ||
      s.var_q.rows() != dp.rows() || s.var_q.cols() != dp.cols()) {
    fail("variation shape mismatch");
    return out;
  }
  for (int i = 0; i < dp.rows(); ++i) {
    for (int t = 0; t < dp.cols(); ++t) {
      if (std::abs(s.var_p(i, t)) > delta * dp(i, t) + tol)
        fail("per-bus P bound violated at bus index " + std::to_string(i) + " hour " +
             std::to_string(t));
      if (std::abs(s.var_q(i, t)) > delta * std::abs(dq(i, t)) + tol)
        fail("per-bus Q bound violated at bus index " + std::to_string(i) + " hour " +
             std::to_string(t));
    }
  }
  for (int t = 0; t < dp.cols(); ++t) {
    if (std::abs(s.var_p.col(t).sum()) > Delta * dp.col(t).sum() + tol)
      fail("system P budget violated at hour " + std::to_string(t));
    if (std::abs(s.var_q.col(t).sum()) > Delta * std::abs(dq.col(t).sum()) + tol)
      fail("system Q budget violated at hour " + std::to_string(t));
  }
  return out;
}

opf::DemandOverride apply_scenario(const NetworkModel& model, const LoadScenario& s) {
  opf::DemandOverride o;
  o.p = (grid::demand_p_matrix(model) + s.var_p).max(0.0);
  o.q = grid::demand_q_matrix(model) + s.var_q;
  return o;
}

LoadScenario sample_scenario(const NetworkModel& model, std::uint64_t master_seed,
                             std::uint64_t index, long* redraws) {
  const Eigen::ArrayXXd dp = grid::demand_p_matrix(model);
  const Eigen::ArrayXXd dq = grid::demand_q_matrix(model);
  const int nb = static_cast<int>(dp.rows());
  const int T = static_cast<int>(dp.cols());
  const Real delta = model.policy.delta_bus;
  const Real Delta = model.policy.delta_system;

  LoadScenario s;
  s.seed = master_seed;
  s.label = ScenarioLabel::Sampled;
  s.var_p.setZero(nb, T);
  s.var_q.setZero(nb, T);
  if (delta == 0) return s;

  SplitRng rng(master_seed, index);
  const Real sigma = delta / 3.0;
  constexpr long kMaxRedraws = 10000;
  for (long attempt = 0; attempt < kMaxRedraws; ++attempt) {
    for (int i = 0; i < nb; ++i) {
      for (int t = 0; t < T; ++t) {
        // common multiplier preserves the power factor; clamping keeps the
        // hard per-bus bound while distorting the Gaussian by only ~0.3 %
        Real x = sigma * rng.next_normal();
        x = std::clamp(x, -delta, delta);
        s.var_p(i, t) = x * dp(i, t);
        s.var_q(i, t) = x * dq(i, t);
      }
    }
    bool ok = true;
    for (int t = 0; t < T && ok; ++t) {
      ok = std::abs(s.var_p.col(t).sum()) <= Delta * dp.col(t).sum() &&
           std::abs(s.var_q.col(t).sum()) <= Delta * std::abs(dq.col(t).sum());
    }
    if (ok) {
      if (redraws != nullptr) *redraws = attempt;
      return s;
    }
  }
  throw RejectionLimitError(
      "scenario sampler exceeded 10^4 redraws; delta_system is too tight "
      "for delta_bus");
}

MonteCarloResult run_monte_carlo(const NetworkModel& model, const MonteCarloConfig& config) {
  if (config.samples < 1) throw DomainError("run_monte_carlo: need at least one sample");
  MonteCarloResult out;

  opf::OpfProblem nominal_problem = opf::build_opf(model);
  opf::OpfSolveOptions nominal_opt;
  const lp::Basis crash = opf::crash_basis(nominal_problem);
  nominal_opt.lp.warm_basis = &crash;
  opf::DispatchSolution nominal = opf::solve_opf(nominal_problem, nominal_opt);
  out.nominal_cost = nominal.cost_total;
  out.nominal_basis = nominal.basis;

  out.samples.assign(config.samples, {});
  std::atomic<long> next{0};
  std::atomic<long> infeasible{0};
  std::atomic<long> redraw_total{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      if (first_error != nullptr) return;
      const long k = next.fetch_add(1);
      if (k >= config.samples) return;
      try {
        long redraws = 0;
        LoadScenario sc = sample_scenario(model, config.master_seed,
                                          static_cast<std::uint64_t>(k), &redraws);
        redraw_total.fetch_add(redraws);
        opf::OpfProblem problem = opf::build_opf(model, apply_scenario(model, sc));
        opf::OpfSolveOptions opt;
        opt.lp.warm_basis = &out.nominal_basis;  // scheduling-independent start
        opf::OpfOutcome res = opf::solve_opf_status(problem, opt);
        CostSample& sample = out.samples[k];
        sample.scenario_id = k;
        sample.seed = config.master_seed;
        sample.status = res.status;
        if (res.status == lp::SolveStatus::Optimal) {
          sample.cost = res.solution->cost_total;
          sample.cost_normalized = sample.cost / out.nominal_cost;
        } else {
          infeasible.fetch_add(1);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error == nullptr) first_error = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error != nullptr) std::rethrow_exception(first_error);
  out.infeasible_count = infeasible.load();
  out.total_redraws = redraw_total.load();
  return out;
}

std::vector<Real> normalized_costs(const MonteCarloResult& result) {
  std::vector<Real> xs;
  xs.reserve(result.samples.size());
  for (const CostSample& s : result.samples)
    if (s.status == lp::SolveStatus::Optimal) xs.push_back(s.cost_normalized);
  return xs;
}

void project_budget(const Eigen::ArrayXXd& base_demand, Real delta_system,
                    Eigen::ArrayXXd& variation) {
  for (int t = 0; t < variation.cols(); ++t) {
    const Real budget = delta_system * std::abs(base_demand.col(t).sum());
    Real pos = 0, neg = 0;
    for (int i = 0; i < variation.rows(); ++i) {
      const Real v = variation(i, t);
      (v > 0 ? pos : neg) += (v > 0 ? v : -v);
    }
    const Real sum = pos - neg;
    if (sum > budget) {
      const Real f = pos > 0 ? (budget + neg) / pos : 0;
      for (int i = 0; i < variation.rows(); ++i)
        if (variation(i, t) > 0) variation(i, t) *= f;
    } else if (sum < -budget) {
      const Real f = neg > 0 ? (budget + pos) / neg : 0;
      for (int i = 0; i < variation.rows(); ++i)
        if (variation(i, t) < 0) variation(i, t) *= f;
    }
  }
}

namespace {

struct Coord {
  int bus, t;
  bool reactive;
};

// relaxed lower-level evaluation used inside the search loop
Real evaluate_relaxed(const NetworkModel& model, const LoadScenario& sc,
                      const lp::Basis* warm, lp::Basis* basis_out) {
  opf::OpfProblem problem = opf::build_opf(model, apply_scenario(model, sc));
  opf::OpfSolveOptions opt;
  opt.relax_binaries = true;
  opt.lp.warm_basis = warm;
  opf::OpfOutcome res = opf::solve_opf_status(problem, opt);
  if (res.status != lp::SolveStatus::Optimal)
    throw SolverError("worst-case search: lower level " +
                      std::string(lp::to_string(res.status)) +
                      (res.detail.empty() ? "" : ": " + res.detail));
  if (basis_out != nullptr) *basis_out = res.solution->basis;
  return res.solution->cost_total;
}

}  // namespace

WorstCaseResult worst_case(const NetworkModel& model, const WorstCaseConfig& config) {
  const Eigen::ArrayXXd dp = grid::demand_p_matrix(model);
  const Eigen::ArrayXXd dq = grid::demand_q_matrix(model);
  const int nb = static_cast<int>(dp.rows());
  const int T = static_cast<int>(dp.cols());
  const Real delta = model.policy.delta_bus;

  WorstCaseResult out;
  {
    opf::OpfProblem nominal = opf::build_opf(model);
    opf::OpfSolveOptions opt;
    const lp::Basis crash = opf::crash_basis(nominal);
    opt.lp.warm_basis = &crash;
    out.nominal_cost = opf::solve_opf(nominal, opt).cost_total;
  }

  LoadScenario zero;
  zero.var_p.setZero(nb, T);
  zero.var_q.setZero(nb, T);
  zero.label = ScenarioLabel::WorstCase;
  if (delta == 0) {
    out.scenario = zero;
    out.cost = out.nominal_cost;
    out.certified = true;
    out.restart_costs = {out.cost};
    return out;
  }

  std::vector<Coord> coords;
  for (int i = 0; i < nb; ++i)
    for (int t = 0; t < T; ++t) {
      if (dp(i, t) > 0) coords.push_back({i, t, false});
      if (dq(i, t) != 0) coords.push_back({i, t, true});
    }

  auto materialize = [&](const std::vector<int>& sign) {
    LoadScenario sc = zero;
    for (std::size_t c = 0; c < coords.size(); ++c) {
      const Coord& co = coords[c];
      if (co.reactive)
        sc.var_q(co.bus, co.t) = sign[c] * delta * dq(co.bus, co.t);
      else
        sc.var_p(co.bus, co.t) = sign[c] * delta * dp(co.bus, co.t);
    }
    project_budget(dp, model.policy.delta_system, sc.var_p);
    project_budget(dq, model.policy.delta_system, sc.var_q);
    return sc;
  };

  SplitRng rng(config.seed, 0x77u);
  std::vector<int> best_sign;
  Real best_relaxed = -lp::kInf;
  out.restart_costs.clear();

  const int total_starts = 1 + std::max(0, config.restarts);
  for (int start = 0; start < total_starts; ++start) {
    std::vector<int> sign(coords.size(), 1);  // all-plus start
    if (start > 0)
      for (auto& v : sign) v = static_cast<int>(rng.next_below(3)) - 1;

    lp::Basis warm;
    Real current = evaluate_relaxed(model, materialize(sign), nullptr, &warm);
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
      bool improved = false;
      for (std::size_t c = 0; c < coords.size(); ++c) {
        const int original = sign[c];
        int best_value = original;
        Real best_cost = current;
        for (int cand : {-1, 0, 1}) {
          if (cand == original) continue;
          sign[c] = cand;
          lp::Basis basis;
          const Real cost = evaluate_relaxed(model, materialize(sign), &warm, &basis);
          if (cost > best_cost + config.improve_tol * (1 + std::abs(best_cost))) {
            best_cost = cost;
            best_value = cand;
            warm = basis;
          }
        }
        sign[c] = best_value;
        if (best_value != original) {
          current = best_cost;
          improved = true;
        }
      }
      if (!improved) break;
    }
    out.restart_costs.push_back(current);
    if (current > best_relaxed) {
      best_relaxed = current;
      best_sign = sign;
    }
  }

  // report the binaries-restored optimum at the best variation found
  out.scenario = materialize(best_sign);
  out.scenario.label = ScenarioLabel::WorstCase;
  {
    opf::OpfProblem problem = opf::build_opf(model, apply_scenario(model, out.scenario));
    out.cost = opf::solve_opf(problem).cost_total;
  }
  Real lo = out.restart_costs.front(), hi = lo;
  for (Real c : out.restart_costs) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  out.certified = (hi - lo) <= 0.001 * std::max(Real(1), std::abs(hi));
  return out;
}

LoadScenario apply_laa(const NetworkModel& model, const std::vector<int>& bus_ids,
                       int hour, Real scale) {
  if (bus_ids.empty()) throw DomainError("apply_laa: bus set is empty");
  if (hour < 0 || hour >= model.time_steps())
    throw DomainError("apply_laa: hour outside the horizon");
  if (scale < 0) throw DomainError("apply_laa: scale must be >= 0");
  LoadScenario s;
  s.label = ScenarioLabel::Manual;
  s.var_p.setZero(model.num_buses(), model.time_steps());
  s.var_q.setZero(model.num_buses(), model.time_steps());
  for (int id : bus_ids) {
    const int i = model.bus_index(id);
    s.var_p(i, hour) = (scale - 1.0) * model.buses[i].load_p[hour];
    s.var_q(i, hour) = (scale - 1.0) * model.buses[i].load_q[hour];
  }
  return s;
}

// --- serialization ----------------------------------------------------------

namespace {

nlohmann::json matrix_json(const Eigen::ArrayXXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index t = 0; t < m.cols(); ++t) row.push_back(m(i, t));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::ArrayXXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  const auto cols = rows > 0 ? j.at(0).size() : 0;
  Eigen::ArrayXXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t t = 0; t < cols; ++t)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          j.at(i).at(t).get<Real>();
  return m;
}

}  // namespace

std::string scenario_to_json(const LoadScenario& s) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["label"] = to_string(s.label);
  j["seed"] = s.seed;
  j["var_p"] = matrix_json(s.var_p);
  j["var_q"] = matrix_json(s.var_q);
  return j.dump(2);
}

LoadScenario scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  LoadScenario s;
  const std::string label = j.value("label", "manual");
  s.label = label == "sampled"      ? ScenarioLabel::Sampled
            : label == "worst_case" ? ScenarioLabel::WorstCase
                                    : ScenarioLabel::Manual;
  s.seed = j.value("seed", 0ULL);
  s.var_p = matrix_from_json(j.at("var_p"));
  s.var_q = matrix_from_json(j.at("var_q"));
  return s;
}

std::string samples_to_csv(const MonteCarloResult& result) {
  std::ostringstream os;
  os.precision(12);
  os << "scenario_id,seed,cost,cost_normalized,status\n";
  for (const CostSample& s : result.samples) {
    os << s.scenario_id << ',' << s.seed << ',' << s.cost << ','
       << s.cost_normalized << ',' << lp::to_string(s.status) << '\n';
  }
  return os.str();
}

std::string samples_summary_json(const MonteCarloResult& result) {
  const std::vector<Real> xs = normalized_costs(result);
  Real mean = 0, m2 = 0, lo = 0, hi = 0;
  if (!xs.empty()) {
    lo = hi = xs.front();
    for (Real x : xs) {
      mean += x;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    mean /= static_cast<Real>(xs.size());
    for (Real x : xs) m2 += (x - mean) * (x - mean);
  }
  nlohmann::json j;
  j["schema_version"] = 1;
  j["count"] = result.samples.size();
  j["solved"] = xs.size();
  j["infeasible"] = result.infeasible_count;
  j["nominal_cost"] = result.nominal_cost;
  j["mean_normalized"] = mean;
  j["stddev_normalized"] = xs.size() > 1 ? std::sqrt(m2 / (xs.size() - 1)) : 0.0;
  j["min_normalized"] = lo;
  j["max_normalized"] = hi;
  j["total_redraws"] = result.total_redraws;
  return j.dump(2);
}

}  // namespace gridsure::scenario
