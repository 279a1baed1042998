// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "gridsure/grid/io.hpp"
#include "gridsure/scenario/scenario.hpp"

using namespace gridsure;
using namespace gridsure::scenario;
using grid::NetworkModel;

namespace {

const std::string kFixtures = GRIDSURE_FIXTURE_DIR;

NetworkModel fixture4() { return grid::load_network(kFixtures + "/network4.json"); }
NetworkModel fixture15() { return grid::load_network(kFixtures + "/network15.json"); }

}  // namespace

TEST_CASE("zero delta degenerates to the zero scenario") {
  NetworkModel m = fixture4();
  m.policy.delta_bus = 0;
  const LoadScenario s = sample_scenario(m, 1, 0);
  CHECK(s.var_p.abs().maxCoeff() == 0.0);
  CHECK(s.var_q.abs().maxCoeff() == 0.0);
}

TEST_CASE("sampled scenarios satisfy the polytope on many draws") {
  const NetworkModel m = fixture4();  // delta = 0.3, Delta = 0.1
  long rejected_any = 0;
  for (int k = 0; k < 2000; ++k) {
    long redraws = 0;
    const LoadScenario s = sample_scenario(m, 99, k, &redraws);
    rejected_any += redraws;
    const ScenarioCheck chk = check_scenario(m, s);
    REQUIRE_MESSAGE(chk.ok, chk.detail);
  }
  // with three buses and a tight budget the repeat-until must fire sometimes
  CHECK(rejected_any > 0);
}

TEST_CASE("per-bus bound implies the system budget when Delta = 1") {
  NetworkModel m = fixture4();
  m.policy.delta_system = 1.0;
  for (int k = 0; k < 500; ++k) {
    long redraws = 0;
    (void)sample_scenario(m, 7, k, &redraws);
    CHECK(redraws == 0);  // acceptance rate 100 %
  }
}

TEST_CASE("sampling is a pure function of (seed, index)") {
  const NetworkModel m = fixture4();
  const LoadScenario a = sample_scenario(m, 42, 13);
  const LoadScenario b = sample_scenario(m, 42, 13);
  CHECK((a.var_p == b.var_p).all());
  const LoadScenario c = sample_scenario(m, 43, 13);
  CHECK((a.var_p != c.var_p).any());
}

TEST_CASE("rejection limit fires on inconsistent budgets") {
  NetworkModel m = fixture15();
  m.policy.delta_bus = 1.0;
  m.policy.delta_system = 1e-6;
  CHECK_THROWS_AS(sample_scenario(m, 1, 0), RejectionLimitError);
}

TEST_CASE("power factor is preserved by the common multiplier") {
  const NetworkModel m = fixture15();
  const LoadScenario s = sample_scenario(m, 5, 3);
  const Eigen::ArrayXXd dp = grid::demand_p_matrix(m);
  const Eigen::ArrayXXd dq = grid::demand_q_matrix(m);
  for (int i = 1; i < m.num_buses(); ++i) {
    for (int t = 0; t < m.time_steps(); ++t) {
      if (dp(i, t) <= 0 || dq(i, t) == 0) continue;
      CHECK(s.var_p(i, t) / dp(i, t) ==
            doctest::Approx(s.var_q(i, t) / dq(i, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("budget projection: exact on violating hours, identity otherwise") {
  Eigen::ArrayXXd base(3, 2);
  base << 1.0, 1.0, 2.0, 2.0, 1.0, 1.0;
  Eigen::ArrayXXd var(3, 2);
  // hour 0 violates (+30% everywhere vs 10% budget), hour 1 is inside
  var.col(0) << 0.3, 0.6, 0.3;
  var.col(1) << 0.1, -0.2, 0.05;
  Eigen::ArrayXXd projected = var;
  project_budget(base, 0.1, projected);
  CHECK(projected.col(0).sum() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK((projected.col(1) == var.col(1)).all());
  // same-sign proportional scaling preserves ratios
  CHECK(projected(0, 0) / projected(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // negative-side violation
  Eigen::ArrayXXd neg = -var;
  project_budget(base, 0.1, neg);
  CHECK(neg.col(0).sum() == doctest::Approx(-0.4).epsilon(1e-12));
}

TEST_CASE("overridden demand is clamped at zero from below") {
  NetworkModel m = fixture4();
  LoadScenario s;
  s.var_p = -2.0 * grid::demand_p_matrix(m);  // would push demand negative
  s.var_q = Eigen::ArrayXXd::Zero(m.num_buses(), m.time_steps());
  const opf::DemandOverride o = apply_scenario(m, s);
  CHECK(o.p.minCoeff() >= 0.0);
}

TEST_CASE("monte carlo: degenerate delta gives exactly the nominal cost") {
  NetworkModel m = fixture4();
  m.policy.delta_bus = 0;
  MonteCarloConfig cfg;
  cfg.samples = 20;
  cfg.master_seed = 3;
  const MonteCarloResult r = run_monte_carlo(m, cfg);
  for (const CostSample& s : r.samples) {
    CHECK(s.status == lp::SolveStatus::Optimal);
    CHECK(s.cost_normalized == 1.0);  // bit-exact: identical problem
  }
}

TEST_CASE("monte carlo determinism across worker counts") {
  const NetworkModel m = fixture4();
  MonteCarloConfig one;
  one.samples = 64;
  one.master_seed = 11;
  one.jobs = 1;
  MonteCarloConfig eight = one;
  eight.jobs = 8;
  const MonteCarloResult a = run_monte_carlo(m, one);
  const MonteCarloResult b = run_monte_carlo(m, eight);
  CHECK(samples_to_csv(a) == samples_to_csv(b));
  CHECK(a.nominal_cost == b.nominal_cost);
}

TEST_CASE("monte carlo sample mean sits near one on the desk fixture") {
  const NetworkModel m = fixture4();
  MonteCarloConfig cfg;
  cfg.samples = 400;
  cfg.master_seed = 17;
  cfg.jobs = 4;
  const MonteCarloResult r = run_monte_carlo(m, cfg);
  CHECK(r.infeasible_count == 0);
  const std::vector<Real> xs = normalized_costs(r);
  double mean = 0;
  for (Real x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  CHECK(mean > 0.95);
  CHECK(mean < 1.05);
}

TEST_CASE("laa scenarios: construction and monotone cost impact") {
  const NetworkModel m = fixture4();
  // scale = 1 is a no-op
  const LoadScenario noop = apply_laa(m, {1, 2}, 1, 1.0);
  CHECK(noop.var_p.abs().maxCoeff() == 0.0);
  CHECK(noop.label == ScenarioLabel::Manual);
  CHECK_THROWS_AS(apply_laa(m, {}, 1, 1.3), DomainError);
  CHECK_THROWS_AS(apply_laa(m, {1}, 99, 1.3), DomainError);

  const double nominal = opf::solve_model(m).cost_total;
  // attacked cost is no cheaper, and grows with the victim set
  double prev = nominal;
  for (const auto& victims : std::vector<std::vector<int>>{{1}, {1, 2}, {1, 2, 3}}) {
    const LoadScenario attack = apply_laa(m, victims, 1, 1.3);
    const double cost =
        opf::solve_model(m, apply_scenario(m, attack)).cost_total;
    CHECK(cost >= prev - 1e-9);
    prev = cost;
  }
  CHECK(prev > nominal + 1e-9);

  // an attack may exceed the natural variation bounds by design
  const LoadScenario big = apply_laa(m, {1, 2, 3}, 1, 2.0);
  CHECK(!check_scenario(m, big).ok);
}

TEST_CASE("worst case: zero delta returns the nominal point") {
  NetworkModel m = fixture4();
  m.policy.delta_bus = 0;
  WorstCaseConfig cfg;
  cfg.restarts = 1;
  const WorstCaseResult r = worst_case(m, cfg);
  CHECK(r.cost == doctest::Approx(r.nominal_cost));
  CHECK(r.scenario.var_p.abs().maxCoeff() == 0.0);
  CHECK(r.certified);
}

TEST_CASE("worst case dominates sampled costs and beats the nominal") {
  const NetworkModel m = fixture4();
  WorstCaseConfig cfg;
  cfg.restarts = 3;
  cfg.seed = 5;
  const WorstCaseResult wc = worst_case(m, cfg);
  CHECK(wc.cost > wc.nominal_cost);
  CHECK(check_scenario(m, wc.scenario).ok);

  MonteCarloConfig mc;
  mc.samples = 200;
  mc.master_seed = 23;
  const MonteCarloResult r = run_monte_carlo(m, mc);
  for (const CostSample& s : r.samples) {
    CHECK(s.cost <= wc.cost * (1 + 1e-6));
  }
}

TEST_CASE("scenario serialization round trip") {
  const NetworkModel m = fixture4();
  const LoadScenario s = sample_scenario(m, 31, 4);
  const LoadScenario back = scenario_from_json(scenario_to_json(s));
  CHECK((back.var_p == s.var_p).all());
  CHECK((back.var_q == s.var_q).all());
  CHECK(back.label == s.label);
}
