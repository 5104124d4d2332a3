#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hydrosddp/lp.hpp"

#include "oracles/lp_enumeration.hpp"

#include <random>

using namespace hydrosddp::lp;

namespace {

// Transport: two supplies (20, 35), three demands (10, 25, 15).
LpModel transport() {
  LpModel m;
  const double cost[2][3] = {{4, 6, 9}, {5, 3, 8}};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) m.add_variable("ship" + std::to_string(i) + std::to_string(j), 0, kInf, cost[i][j]);
  }
  const double supply[2] = {20, 35};
  const double demand[3] = {10, 25, 15};
  for (int i = 0; i < 2; ++i) {
    m.add_row("supply" + std::to_string(i), {{3 * i, 1.0}, {3 * i + 1, 1.0}, {3 * i + 2, 1.0}}, Sense::LessEqual, supply[i]);
    m.designate_dual("supply" + std::to_string(i));
  }
  for (int j = 0; j < 3; ++j) {
    m.add_row("demand" + std::to_string(j), {{j, 1.0}, {3 + j, 1.0}}, Sense::GreaterEqual, demand[j]);
    m.designate_dual("demand" + std::to_string(j));
  }
  return m;
}

// Same LP as G x <= h for the vertex oracle.
double transport_oracle(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(5, 6);
  Eigen::VectorXd h(5);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) G(i, 3 * i + j) = 1.0;
    h(i) = supply(i);
  }
  for (int j = 0; j < 3; ++j) {
    G(2 + j, j) = -1.0;
    G(2 + j, 3 + j) = -1.0;
    h(2 + j) = -demand(j);
  }
  Eigen::VectorXd c(6);
  c << 4, 6, 9, 5, 3, 8;
  return oracle::enumerate_vertices(G, h, c)->objective;
}

}  // namespace

TEST_CASE("single active bound") {
  LpModel m;
  const int x = m.add_variable("x", -kInf, kInf, 1.0);
  m.add_row("x>=3", {{x, 1.0}}, Sense::GreaterEqual, 3.0);
  m.add_row("x<=10", {{x, 1.0}}, Sense::LessEqual, 10.0);
  m.designate_dual("x>=3");
  const LpSolution s = solve(m);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.dual(m, "x>=3") == doctest::Approx(1.0));
}

TEST_CASE("contradictory bounds are infeasible") {
  LpModel m;
  const int x = m.add_variable("x", 0.0, kInf, 0.0);
  m.add_row("neg", {{x, 1.0}}, Sense::LessEqual, -1.0);
  CHECK(solve(m).status == Status::Infeasible);
}

TEST_CASE("unbounded ray is reported") {
  LpModel m;
  const int x = m.add_variable("x", 0.0, kInf, -1.0);
  m.add_row("loose", {{x, 1.0}}, Sense::GreaterEqual, 1.0);
  CHECK(solve(m).status == Status::Unbounded);
}

TEST_CASE("transport LP matches vertex enumeration, duals match finite differences of the oracle") {
  LpModel m = transport();
  const LpSolution s = solve(m);
  REQUIRE(s.optimal());
  Eigen::VectorXd supply(2), demand(3);
  supply << 20, 35;
  demand << 10, 25, 15;
  const double base = transport_oracle(supply, demand);
  CHECK(s.objective == doctest::Approx(base).epsilon(1e-12));

  const double delta = 1e-3;
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd d = demand;
    d(j) += delta;
    const double fd = (transport_oracle(supply, d) - base) / delta;
    CHECK(s.dual(m, "demand" + std::to_string(j)) == doctest::Approx(fd).epsilon(1e-6));
  }
  // Supply 0 is slack at the optimum, supply 1 is binding.
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd sp = supply;
    sp(i) += delta;
    const double fd = (transport_oracle(sp, demand) - base) / delta;
    CHECK(s.dual(m, "supply" + std::to_string(i)) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("set_rhs changes only that row and is reversible") {
  LpModel m = transport();
  const LpSolution before = solve(m);
  m.set_rhs("demand1", 28.0);
  const LpSolution moved = solve(m);
  CHECK(moved.objective == doctest::Approx(before.objective + 3.0 * before.dual(m, "demand1")));
  m.set_rhs("demand1", 25.0);
  const LpSolution back = solve(m);
  CHECK(back.objective == before.objective);
  CHECK(back.primal == before.primal);
  CHECK_THROWS_AS(m.set_rhs("nope", 1.0), UnknownConstraint);
}

TEST_CASE("state fixing row dual reports sensitivity") {
  LpModel m;
  const int in = m.add_variable("x.in", -kInf, kInf, 0.0);
  const int y = m.add_variable("y", 0.0, kInf, 2.0);
  m.add_row("state_fix_1", {{in, 1.0}}, Sense::Equal, 0.0);
  m.add_row("cover", {{y, 1.0}, {in, 1.0}}, Sense::GreaterEqual, 10.0);
  m.designate_dual("state_fix_1");
  m.set_rhs("state_fix_1", 5.0);
  const LpSolution s = solve(m);
  CHECK(s.objective == doctest::Approx(10.0));
  CHECK(s.dual(m, "state_fix_1") == doctest::Approx(-2.0));
}

TEST_CASE("finite-difference rhs perturbation matches the dual on a nondegenerate LP") {
  LpModel m;
  const int a = m.add_variable("a", 0.0, 8.0, 3.0);
  const int b = m.add_variable("b", 0.0, 8.0, 5.0);
  m.add_row("need", {{a, 1.0}, {b, 1.0}}, Sense::GreaterEqual, 11.0);
  m.designate_dual("need");
  const LpSolution s = solve(m);
  const double delta = 1e-4;
  m.set_rhs("need", 11.0 + delta);
  const LpSolution t = solve(m);
  CHECK(std::abs((t.objective - s.objective) - s.dual(m, "need") * delta) < 1e-6);
  CHECK(s.dual(m, "need") == doctest::Approx(5.0));
}

TEST_CASE("add_row: redundant row, binding cut, max of random cuts") {
  LpModel m;
  const int theta = m.add_variable("theta", 0.0, kInf, 1.0);
  m.add_row("redundant", std::vector<Term>{}, Sense::GreaterEqual, -1.0);
  CHECK(solve(m).objective == doctest::Approx(0.0));
  m.add_row("cut", {{theta, 1.0}}, Sense::GreaterEqual, 2.0);
  CHECK(solve(m).objective == doctest::Approx(2.0));

  // theta >= a_k + b_k x at fixed x = 0.7
  LpModel c;
  const int th = c.add_variable("theta", 0.0, kInf, 1.0);
  const int x = c.add_variable("x", 0.7, 0.7, 0.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double best = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double a = u(rng), b = u(rng);
    c.add_row("", {{th, 1.0}, {x, -b}}, Sense::GreaterEqual, a);
    best = std::max(best, a + b * 0.7);
  }
  CHECK(solve(c).objective == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("adding a constraint never decreases the objective; repeated solves agree") {
  LpModel m = transport();
  const double base = solve(m).objective;
  CHECK(solve(m).objective == base);
  m.add_row("cap", {{1, 1.0}}, Sense::LessEqual, 5.0);
  CHECK(solve(m).objective >= base - 1e-9);
}

TEST_CASE("malformed rows are rejected") {
  LpModel m;
  m.add_variable("x", 0.0, 1.0, 0.0);
  CHECK_THROWS_AS(m.add_row("bad", {{3, 1.0}}, Sense::LessEqual, 1.0), MalformedModel);
  CHECK_THROWS_AS(m.add_row("bad", {{"y", 1.0}}, Sense::LessEqual, 1.0), MalformedModel);
  CHECK_THROWS_AS(m.add_variable("x", 0.0, 1.0, 0.0), MalformedModel);
  CHECK_THROWS_AS(m.designate_dual("missing"), UnknownConstraint);
}

TEST_CASE("truncate_rows drops temporary rows") {
  LpModel m;
  const int t = m.add_variable("t", 0.0, kInf, 1.0);
  const int base = m.num_rows();
  m.add_row("", {{t, 1.0}}, Sense::GreaterEqual, 4.0);
  CHECK(solve(m).objective == doctest::Approx(4.0));
  m.truncate_rows(base);
  CHECK(solve(m).objective == doctest::Approx(0.0));
}

TEST_CASE("random feasible LPs agree with vertex enumeration") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3, m = 4;
    Eigen::MatrixXd G(m, n);
    Eigen::VectorXd h(m), c(n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) G(i, j) = u(rng) - 1.0;
      h(i) = u(rng);
    }
    for (int j = 0; j < n; ++j) c(j) = u(rng) - 1.5;
    // Box keeps it bounded.
    LpModel lp;
    for (int j = 0; j < n; ++j) lp.add_variable("x" + std::to_string(j), 0.0, 5.0, c(j));
    for (int i = 0; i < m; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < n; ++j) terms.push_back({j, G(i, j)});
      lp.add_row("r" + std::to_string(i), terms, Sense::LessEqual, h(i));
    }
    Eigen::MatrixXd Gb(m + n, n);
    Eigen::VectorXd hb(m + n);
    Gb << G, Eigen::MatrixXd::Identity(n, n);
    hb << h, Eigen::VectorXd::Constant(n, 5.0);
    const auto best = oracle::enumerate_vertices(Gb, hb, c);
    const LpSolution s = solve(lp);
    REQUIRE(best.has_value());
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(best->objective).epsilon(1e-9));
  }
}
