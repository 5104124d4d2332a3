#pragma once

// Small systems shared by the unit and acceptance tests.

#include "hydrosddp/hydrothermal.hpp"
#include "hydrosddp/sddp.hpp"

#include "value_iteration.hpp"

namespace fixtures {

using namespace hydrosddp;

inline WeekBlocks single_block(double demand) {
  WeekBlocks w;
  w.hours = {168.0};
  w.demand = Eigen::MatrixXd::Constant(1, 1, demand);
  return w;
}

/// One reservoir, one node, 4-week cycle, inflows {20, 50, 80} m^3/s.
inline SystemData reservoir_system() {
  SystemData s;
  s.nodes = {"N"};
  const double week = kSecondsPerHour * kHoursPerWeek;
  s.reservoirs = {{"lake", 200.0 * week, 100.0 * week, 0.0}};
  s.hydro = {{"gen", "N", 1.0, 100.0, 1000.0, "lake", "", 0.0}};
  s.peakers = {{"thermal", "N", 60.0, 50.0}};
  s.fixed_generation = Eigen::VectorXd::Zero(1);
  s.tranches = {{"all", 1.0, Eigen::VectorXd::Constant(1, 500.0)}};
  for (double d : {90.0, 110.0, 120.0, 100.0}) s.weeks.push_back(single_block(d));
  for (double w : {20.0, 50.0, 80.0}) s.inflows.push_back(std::vector<Eigen::VectorXd>(4, Eigen::VectorXd::Constant(1, w)));
  s.annual_discount = 0.9;
  return s;
}

inline oracle::ReservoirDp reservoir_oracle(const SystemData& s, double rho) {
  oracle::ReservoirDp dp;
  dp.capacity = s.reservoirs[0].capacity;
  dp.gamma = s.hydro[0].specific_power;
  dp.flow_capacity = s.hydro[0].flow_capacity;
  dp.thermal_capacity = s.peakers[0].capacity;
  dp.thermal_cost = s.peakers[0].cost;
  dp.shed_cost = s.tranches[0].cost(0);
  for (const WeekBlocks& w : s.weeks) dp.demand.push_back(w.demand(0, 0));
  for (const auto& year : s.inflows) dp.inflows.push_back(year[0](0));
  dp.rho = rho;
  return dp;
}

/// Two nodes joined by a line, a reservoir in the south, a peaker candidate
/// in the north, two load blocks.
inline SystemData two_node_system() {
  SystemData s;
  s.nodes = {"north", "south"};
  const double week = kSecondsPerHour * kHoursPerWeek;
  s.reservoirs = {{"lake", 150.0 * week, 75.0 * week, 0.0}};
  s.hydro = {{"gen", "south", 1.0, 150.0, 1000.0, "lake", "", 0.0}};
  s.peakers = {{"thermal", "north", 40.0, 60.0}, {"green", "north", 0.0, 100.0}};
  s.lines = {{"link", "south", "north", 80.0}};
  s.fixed_generation = Eigen::VectorXd::Zero(2);
  s.tranches = {{"all", 1.0, Eigen::VectorXd::Constant(1, 1000.0)}};
  for (int t = 0; t < 4; ++t) {
    WeekBlocks w;
    w.hours = {48.0, 120.0};
    w.demand.resize(2, 2);
    const double season = t == 1 || t == 2 ? 10.0 : 0.0;
    w.demand << 140.0 + season, 80.0 + season, 40.0, 30.0;
    s.weeks.push_back(w);
  }
  for (double w : {30.0, 60.0, 90.0}) s.inflows.push_back(std::vector<Eigen::VectorXd>(4, Eigen::VectorXd::Constant(1, w)));
  s.annual_discount = 0.9;
  return s;
}

inline InvestmentSpec green_peaker(double overnight) {
  InvestmentSpec spec;
  spec.annual_discount = 0.9;
  spec.candidates = {{"green", InvestmentKind::Peaker, "green", {}, overnight, std::nullopt, std::nullopt}};
  return spec;
}

/// Onslow-style pump/generator pair at one node: the pump lifts river water
/// into an empty upper lake, the generator releases it to the sea. Block 1
/// is priced by a cheap peaker, block 2 by an expensive one.
inline SystemData pumping_system(double cheap_cost, double expensive_cost) {
  SystemData s;
  s.nodes = {"otago"};
  s.reservoirs = {{"onslow", 1e9, 0.0, 0.0}};
  s.hydro = {{"Onslow_Pump", "otago", -7.027, 10.0, 0.0, "", "onslow", 0.0},
             {"Onslow_Gen", "otago", 5.417, 10.0, 0.0, "onslow", "", 0.0}};
  s.pump_pairs = {{"Onslow_Pump", "Onslow_Gen"}};
  s.peakers = {{"cheap", "otago", 200.0, cheap_cost}, {"expensive", "otago", 200.0, expensive_cost}};
  s.fixed_generation = Eigen::VectorXd::Zero(1);
  s.tranches = {{"all", 1.0, Eigen::VectorXd::Constant(1, 10.0 * std::max(cheap_cost, expensive_cost))}};
  WeekBlocks w;
  w.hours = {84.0, 84.0};
  w.demand.resize(1, 2);
  w.demand << 100.0, 300.0;  // block 2 needs the expensive peaker
  s.weeks = {w};
  s.inflows = {{Eigen::VectorXd::Zero(1)}};
  s.annual_discount = 0.9;
  return s;
}

/// Node with no state, stage cost 1, and a self edge of probability rho.
inline Problem unit_cost_cycle(double rho) {
  Problem p;
  StageTemplate t;
  t.name = "unit";
  const int v = t.model.add_variable("one", 1.0, 1.0, 1.0);
  (void)v;
  t.add_cost_to_go();
  p.templates = {t};
  p.graph = cyclic_graph(1, rho);
  p.initial_state = Eigen::VectorXd();
  return p;
}

}  // namespace fixtures
