#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hydrosddp/hydrothermal.hpp"
#include "hydrosddp/investment.hpp"
#include "hydrosddp/sddp.hpp"

#include "oracles/fixtures.hpp"

using namespace hydrosddp;
using lp::Sense;

namespace {

// One reservoir unit x in [0, 10]; release and spill cost a cent, thermal
// covers the rest of the demand; the inflow is the payload.
StageTemplate toy_stage(const std::string& name, double demand, double thermal_cost) {
  StageTemplate t;
  t.name = name;
  const StateHandle x = t.add_state("x", 0.0, 10.0);
  const int r = t.model.add_variable("r", 0.0, lp::kInf, 0.01);
  const int s = t.model.add_variable("s", 0.0, lp::kInf, 0.01);
  const int g = t.model.add_variable("g", 0.0, lp::kInf, thermal_cost);
  const int bal = t.model.add_row("balance", {{x.out, 1.0}, {x.in, -1.0}, {r, 1.0}, {s, 1.0}}, Sense::Equal, 0.0);
  t.noise_terms.push_back({bal, 0, 1.0});
  t.model.add_row("demand", {{r, 1.0}, {g, 1.0}}, Sense::GreaterEqual, demand);
  t.add_cost_to_go();
  return t;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

Problem two_stage(const std::vector<double>& second_inflows) {
  Problem p;
  p.templates = {toy_stage("first", 6.0, 10.0), toy_stage("second", 8.0, 20.0)};
  p.graph = linear_graph(2);
  p.graph.set_noise(0, NoiseDistribution::deterministic(scalar(3.0)));
  std::vector<Eigen::VectorXd> w;
  for (double v : second_inflows) w.push_back(scalar(v));
  p.graph.set_noise(1, NoiseDistribution::uniform(w));
  p.initial_state = scalar(5.0);
  return p;
}

// Extensive form of two_stage: one first-stage copy, one second-stage copy
// per outcome, solved as a single LP.
double extensive_form(const std::vector<double>& second_inflows) {
  lp::LpModel m;
  const int x1 = m.add_variable("x1", 0.0, 10.0, 0.0);
  const int r1 = m.add_variable("r1", 0.0, lp::kInf, 0.01);
  const int s1 = m.add_variable("s1", 0.0, lp::kInf, 0.01);
  const int g1 = m.add_variable("g1", 0.0, lp::kInf, 10.0);
  m.add_row("bal1", {{x1, 1.0}, {r1, 1.0}, {s1, 1.0}}, Sense::Equal, 5.0 + 3.0);
  m.add_row("dem1", {{r1, 1.0}, {g1, 1.0}}, Sense::GreaterEqual, 6.0);
  const double p = 1.0 / second_inflows.size();
  for (std::size_t k = 0; k < second_inflows.size(); ++k) {
    const std::string tag = std::to_string(k);
    const int x2 = m.add_variable("x2" + tag, 0.0, 10.0, 0.0);
    const int r2 = m.add_variable("r2" + tag, 0.0, lp::kInf, 0.01 * p);
    const int s2 = m.add_variable("s2" + tag, 0.0, lp::kInf, 0.01 * p);
    const int g2 = m.add_variable("g2" + tag, 0.0, lp::kInf, 20.0 * p);
    m.add_row("bal2" + tag, {{x2, 1.0}, {x1, -1.0}, {r2, 1.0}, {s2, 1.0}}, Sense::Equal, second_inflows[k]);
    m.add_row("dem2" + tag, {{r2, 1.0}, {g2, 1.0}}, Sense::GreaterEqual, 8.0);
  }
  const lp::LpSolution s = lp::solve(m);
  REQUIRE(s.optimal());
  return s.objective;
}

// Stateless cycle of `stages` nodes of unit cost.
Problem unit_cycle(int stages, double rho) {
  Problem p;
  for (int t = 0; t < stages; ++t) {
    StageTemplate s;
    s.name = "unit" + std::to_string(t);
    s.model.add_variable("one", 1.0, 1.0, 1.0);
    s.add_cost_to_go();
    p.templates.push_back(s);
  }
  p.graph = cyclic_graph(stages, rho);
  return p;
}

// Capacity state covers a unit demand otherwise met at cost `price`.
Problem break_even(double rho, double price, double overnight) {
  Problem p;
  StageTemplate t;
  t.name = "operate";
  const StateHandle c = t.add_state(capacity_state("c"), 0.0, 10.0);
  t.model.add_row("carry", {{c.out, 1.0}, {c.in, -1.0}}, Sense::Equal, 0.0);
  const int g = t.model.add_variable("g", 0.0, lp::kInf, price);
  t.model.add_row("cover", {{g, 1.0}, {c.in, 1.0}}, Sense::GreaterEqual, 1.0);
  t.add_cost_to_go();
  p.templates = {t};
  p.graph = cyclic_graph(1, rho);
  p.initial_state = Eigen::VectorXd::Zero(1);
  InvestmentSpec spec;
  spec.annual_discount = 0.9;
  spec.candidates = {{"c", InvestmentKind::Peaker, "x", {}, overnight, std::nullopt, std::nullopt}};
  return add_investment_root(p, spec);
}

void require_same_cuts(const Policy& a, const Policy& b) {
  REQUIRE(a.pools.size() == b.pools.size());
  for (std::size_t n = 0; n < a.pools.size(); ++n) {
    REQUIRE(a.pools[n].size() == b.pools[n].size());
    for (int k = 0; k < a.pools[n].size(); ++k) {
      CHECK(a.pools[n].cut(k).intercept == b.pools[n].cut(k).intercept);
      CHECK(a.pools[n].cut(k).slope == b.pools[n].cut(k).slope);
    }
  }
}

}  // namespace

TEST_CASE("unit cost cycle converges to the geometric series") {
  for (double rho : {0.5, 0.9}) {
    const Problem p = fixtures::unit_cost_cycle(rho);
    TrainingOptions o;
    o.iterations = 200;
    const Policy policy = train(p, o);
    CHECK(policy.log.back().lower_bound == doctest::Approx(1.0 / (1.0 - rho)).epsilon(1e-6));
    for (std::size_t k = 1; k < policy.log.size(); ++k) {
      CHECK(policy.log[k].lower_bound >= policy.log[k - 1].lower_bound - 1e-9);
    }
  }
}

TEST_CASE("deterministic two-stage problem matches its merged LP") {
  const Problem p = two_stage({2.0});
  TrainingOptions o;
  o.iterations = 5;
  const Policy policy = train(p, o);
  CHECK(policy.log.back().lower_bound == doctest::Approx(extensive_form({2.0})).epsilon(1e-9));
}

TEST_CASE("first backward pass builds the averaged cut by hand") {
  const Problem p = two_stage({0.0, 8.0});
  Policy policy = Policy::empty(p);
  StageSolver solver(p);
  Rng rng(1);
  const Trajectory tr = forward_pass(p, policy, rng, 10, solver);
  REQUIRE(tr.steps.size() == 2);
  // Myopic first stage releases exactly the demand and stores 2.
  CHECK(tr.steps[0].state_out(0) == doctest::Approx(2.0));
  backward_pass(p, policy, tr, solver, 1);
  REQUIRE(policy.pools[0].size() == 1);
  const Cut cut = policy.pools[0].cut(0);
  // Outcome 0: 2 units of water, 6 of thermal; outcome 8: surplus, stores 2.
  const double v0 = 0.01 * 2.0 + 20.0 * 6.0, v8 = 0.01 * 8.0;
  const double slope = 0.5 * (-20.0 + 0.01) + 0.5 * 0.0;
  CHECK(cut.slope(0) == doctest::Approx(slope).epsilon(1e-12));
  CHECK(cut.intercept == doctest::Approx(0.5 * (v0 + v8) - slope * 2.0).epsilon(1e-12));
}

TEST_CASE("two-outcome problem converges to the extensive form") {
  const Problem p = two_stage({0.0, 8.0});
  TrainingOptions o;
  o.iterations = 30;
  const Policy policy = train(p, o);
  CHECK(policy.log.back().lower_bound == doctest::Approx(extensive_form({0.0, 8.0})).epsilon(1e-9));
}

TEST_CASE("training is deterministic in the seed, including across threads") {
  const SystemData s = fixtures::reservoir_system();
  ProblemOptions po;
  po.stages_per_year = 4;
  po.investment_root = false;
  const Problem p = build_cyclic_problem(s, InvestmentSpec{}, po);
  TrainingOptions o;
  o.iterations = 25;
  o.seed = 7;
  o.forward_passes = 2;
  const Policy a = train(p, o);
  const Policy b = train(p, o);
  require_same_cuts(a, b);
  o.threads = 2;
  const Policy c = train(p, o);
  require_same_cuts(a, c);
  CHECK(a.log.back().lower_bound == c.log.back().lower_bound);
}

TEST_CASE("forward pass lengths follow the graph's expected visits") {
  const Problem p = unit_cycle(4, 0.8);
  const Policy policy = Policy::empty(p);
  StageSolver solver(p);
  Rng rng(99);
  const int samples = 20000;
  double total = 0.0;
  for (int k = 0; k < samples; ++k) total += forward_pass(p, policy, rng, 10000, solver).steps.size();
  const double expected = p.graph.expected_trajectory_length();
  CHECK(expected == doctest::Approx(5.0));
  CHECK(std::abs(total / samples - expected) <= 0.02 * expected);
}

TEST_CASE("forward pass respects the depth cap") {
  const Problem p = unit_cycle(2, 0.999);
  const Policy policy = Policy::empty(p);
  StageSolver solver(p);
  Rng rng(5);
  CHECK(forward_pass(p, policy, rng, 7, solver).steps.size() <= 7);
  CHECK(default_max_depth(p) == 40);
}

TEST_CASE("investment happens exactly when capacity pays back") {
  // One unit of capacity saves price / (1 - rho) = 2 in expectation.
  {
    const Problem p = break_even(0.5, 1.0, 1.5);
    TrainingOptions o;
    o.iterations = 60;
    const Policy policy = train(p, o);
    CHECK(first_stage_solution(p, policy)(0) == doctest::Approx(1.0));
    CHECK(policy.log.back().lower_bound == doctest::Approx(1.5).epsilon(1e-6));
  }
  {
    const Problem p = break_even(0.5, 1.0, 2.5);
    TrainingOptions o;
    o.iterations = 60;
    const Policy policy = train(p, o);
    CHECK(first_stage_solution(p, policy)(0) == doctest::Approx(0.0));
    CHECK(policy.log.back().lower_bound == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("cut pool argmax") {
  CutPool pool(2);
  CHECK(pool.argmax(Eigen::Vector2d(0, 0)) == -1);
  pool.add(1.0, Eigen::Vector2d(1.0, 0.0), 1);
  pool.add(0.0, Eigen::Vector2d(0.0, 2.0), 2);
  double v = 0.0;
  CHECK(pool.argmax(Eigen::Vector2d(0.0, 1.0), &v) == 1);
  CHECK(v == doctest::Approx(2.0));
  CHECK(pool.argmax(Eigen::Vector2d(3.0, 0.0)) == 0);
  CHECK(pool.value(0, Eigen::Vector2d(3.0, 0.0)) == doctest::Approx(4.0));
}

TEST_CASE("infeasible stage reports node, state and noise") {
  Problem p;
  StageTemplate t = toy_stage("tight", 1.0, 1.0);
  const int g = t.model.find_variable("g");
  t.model.set_bounds(g, 0.0, 0.0);
  const int r = t.model.find_variable("r");
  t.model.set_bounds(r, 0.0, 0.5);
  p.templates = {t};
  p.graph = linear_graph(1);
  p.graph.set_noise(0, NoiseDistribution::deterministic(scalar(0.0)));
  p.initial_state = scalar(0.0);
  TrainingOptions o;
  o.iterations = 1;
  try {
    train(p, o);
    FAIL("expected InfeasibleSubproblem");
  } catch (const InfeasibleSubproblem& e) {
    CHECK(e.node() == "stage_1");
    CHECK(e.state().size() == 1);
    CHECK(e.noise()(0) == 0.0);
  }
}

TEST_CASE("policy compatibility") {
  const Problem p = two_stage({1.0});
  Policy policy = Policy::empty(p);
  policy.check_compatible(p);
  policy.state_names = {"other"};
  CHECK_THROWS_AS(policy.check_compatible(p), TrainingError);
}

TEST_CASE("simulation estimators agree on the unit cycle") {
  const Problem p = unit_cycle(1, 0.5);
  TrainingOptions o;
  o.iterations = 80;
  const Policy policy = train(p, o);
  SimulationOptions so;
  so.seed = 3;
  so.estimator = Estimator::Discounted;
  so.max_depth = 80;
  const auto d = simulate(p, policy, ScenarioSource::in_sample(), 3, so);
  CHECK(d[0].discounted_cost() == doctest::Approx(2.0).epsilon(1e-9));
  so.estimator = Estimator::Sampled;
  so.max_depth = 0;
  const auto s = simulate(p, policy, ScenarioSource::in_sample(), 20000, so);
  double mean = 0.0;
  for (const Trajectory& t : s) mean += t.total_cost();
  CHECK(mean / s.size() == doctest::Approx(2.0).epsilon(0.03));
}
