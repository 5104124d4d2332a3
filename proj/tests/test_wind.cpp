#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hydrosddp/wind.hpp"

#include <random>

using namespace hydrosddp;

namespace {

WindTraces single_region(const Eigen::VectorXd& factors) {
  WindTraces t;
  t.regions = {"R"};
  t.shares = Eigen::VectorXd::Ones(1);
  t.factors = {factors};
  return t;
}

}  // namespace

TEST_CASE("blocks from a sorted series") {
  Eigen::VectorXd s(4);
  s << 3, 10, 1, 8;
  const BlockAssignment a = build_blocks(s, {2, 2});
  CHECK(a.levels(0) == doctest::Approx(9.0));
  CHECK(a.levels(1) == doctest::Approx(2.0));
  CHECK(a.block_of == std::vector<int>{1, 0, 1, 0});
  CHECK(a.order == std::vector<int>{1, 3, 0, 2});
}

TEST_CASE("ties keep observation order") {
  const BlockAssignment a = build_blocks(Eigen::VectorXd::Constant(3, 5.0), {1, 2});
  CHECK(a.order == std::vector<int>{0, 1, 2});
  CHECK(a.block_of == std::vector<int>{0, 1, 1});
}

TEST_CASE("block counts must match the series") {
  CHECK_THROWS_AS(build_blocks(Eigen::VectorXd::Zero(167), {84, 84}), WindError);
  CHECK_THROWS_AS(build_blocks(Eigen::VectorXd::Zero(2), {2, 0}), WindError);
}

TEST_CASE("net demand") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(1, 2, 200.0);
  Eigen::MatrixXd f(1, 2);
  f << 0.4, 0.1;
  const Eigen::Vector2d alpha(1.0, 0.0);
  const Eigen::MatrixXd n = net_demand(d, f, alpha, 200.0);
  CHECK(n(0, 0) == doctest::Approx(120.0));
  CHECK(n(0, 1) == doctest::Approx(200.0));
  CHECK(system_net_demand(Eigen::VectorXd::Constant(1, 400.0), f, alpha, 200.0)(0) == doctest::Approx(320.0));
  CHECK_THROWS_AS(net_demand(d, f, alpha, -1.0), WindError);
}

TEST_CASE("ordinary least squares by hand") {
  const auto [slope, residual] = ols_slope({1.0, 2.0, 3.0}, {2.0, 4.0, 7.0});
  CHECK(slope == doctest::Approx(2.5));
  CHECK(residual == doctest::Approx(std::sqrt(1.0 / 6.0)));
  CHECK_THROWS_AS(ols_slope({1.0, 1.0}, {0.0, 1.0}), WindError);
}

TEST_CASE("constant capacity factor gives slope alpha * c with zero residual") {
  WindTraces t;
  t.regions = {"north", "south"};
  t.shares = Eigen::Vector2d(0.3, 0.7);
  Eigen::MatrixXd f(6, 2);
  f.col(0).setConstant(0.42);
  f.col(1).setConstant(0.17);
  t.factors = {f};
  Eigen::VectorXd demand(6);
  demand << 500, 800, 650, 300, 900, 420;
  WindFitOptions o;
  o.block_hours = {2, 4};
  const WindSlopeTable table = fit_slopes({demand}, t, o);
  for (int b = 0; b < 2; ++b) {
    CHECK(table.mu[0](0, b) == doctest::Approx(0.3 * 0.42).epsilon(1e-12));
    CHECK(table.mu[0](1, b) == doctest::Approx(0.7 * 0.17).epsilon(1e-12));
    CHECK(table.residual[0](0, b) < 1e-9);
  }
  CHECK(table.clamped_count() == 0);
}

TEST_CASE("one swap between blocks gives a negative slope that is clamped") {
  // Net demand is {10, 12 - K}: the observations swap blocks at K = 2.
  Eigen::VectorXd f(2);
  f << 0.0, 1.0;
  Eigen::VectorXd demand(2);
  demand << 10.0, 12.0;
  WindFitOptions o;
  o.grid = {1.0, 3.0, 5.0};
  o.nominal = 3.0;
  o.block_hours = {1, 1};
  const WindSlopeTable table = fit_slopes({demand}, single_region(f), o);
  // Block 1 output {1, 0, 0}, block 2 output {0, 3, 5}.
  CHECK(table.raw_mu[0](0, 0) == doctest::Approx(-0.25));
  CHECK(table.mu[0](0, 0) == 0.0);
  CHECK(table.mu[0](0, 1) == doctest::Approx(1.25));
  CHECK(table.clamped_count() == 1);
  CHECK(table.nominal_blocks[0].block_of == std::vector<int>{0, 1});
}

TEST_CASE("block aggregates are convex on top, concave at the bottom") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd demand(24);
    Eigen::MatrixXd f(24, 3);
    for (int h = 0; h < 24; ++h) {
      demand(h) = 3000.0 + 2000.0 * u(rng);
      for (int r = 0; r < 3; ++r) f(h, r) = u(rng);
    }
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(50.0 * k);
    const BlockShapeReport rep = block_shape_check(demand, f, Eigen::Vector3d(0.2, 0.3, 0.5), grid, {5, 10, 9});
    CHECK(rep.ok());
  }
}

TEST_CASE("trace validation") {
  WindTraces t = single_region(Eigen::VectorXd::Constant(4, 0.5));
  t.validate();
  t.factors[0](1) = 1.03;
  t.validate();
  CHECK(t.overshoot_count() == 1);
  t.factors[0](1) = 1.2;
  CHECK_THROWS_AS(t.validate(), WindError);
  t = single_region(Eigen::VectorXd::Constant(4, 0.5));
  t.shares(0) = 0.9;
  CHECK_THROWS_AS(t.validate(), WindError);
  t = single_region(Eigen::VectorXd::Constant(4, 0.5));
  t.years = 3;
  CHECK_THROWS_AS(t.validate(), WindError);
}

TEST_CASE("multi-year observations scale the block counts") {
  CHECK(observation_counts({10, 20}, 3) == std::vector<int>{30, 60});
}
