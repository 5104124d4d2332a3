#include "hydrosddp/hydrothermal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hydrosddp {

namespace {

template <typename T>
int index_of(const std::vector<T>& items, const std::string& name) {
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k].name == name) return static_cast<int>(k);
  }
  return -1;
}

std::string key(const std::string& prefix, const std::string& a, int block) {
  return prefix + "[" + a + "," + std::to_string(block + 1) + "]";
}

std::string key(const std::string& prefix, const std::string& a, const std::string& b, int block) {
  return prefix + "[" + a + "," + b + "," + std::to_string(block + 1) + "]";
}

double tranche_cost(const LoadTranche& l, int block) {
  return l.cost.size() == 1 ? l.cost(0) : l.cost(block);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw SystemError(message);
}

// Storage coefficient of one m^3/s sustained for `hours`, in 10^6 m^3.
double volume(double hours) { return kSecondsPerHour * hours / kStorageScale; }

}  // namespace

int SystemData::node_index(const std::string& name) const {
  const auto it = std::find(nodes.begin(), nodes.end(), name);
  return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}
int SystemData::reservoir_index(const std::string& name) const { return index_of(reservoirs, name); }
int SystemData::hydro_index(const std::string& name) const { return index_of(hydro, name); }
int SystemData::peaker_index(const std::string& name) const { return index_of(peakers, name); }
int SystemData::line_index(const std::string& name) const { return index_of(lines, name); }

void SystemData::validate() const {
  require(!nodes.empty(), "system has no network nodes");
  require(std::set<std::string>(nodes.begin(), nodes.end()).size() == nodes.size(), "duplicate network node");
  require(annual_discount > 0.0 && annual_discount < 1.0, "annual discount must lie in (0, 1)");
  require(fixed_generation.size() == 0 || fixed_generation.size() == static_cast<Eigen::Index>(nodes.size()),
          "fixed generation needs one entry per node");
  require((fixed_generation.array() >= 0.0).all(), "fixed generation must be non-negative");

  std::set<std::string> names;
  for (const Reservoir& r : reservoirs) {
    require(names.insert("reservoir:" + r.name).second, "duplicate reservoir '" + r.name + "'");
    require(r.capacity >= 0.0, "reservoir '" + r.name + "': capacity must be non-negative");
    require(r.initial >= 0.0 && r.initial <= r.capacity, "reservoir '" + r.name + "': initial storage outside [0, capacity]");
    require(r.minimum >= 0.0 && r.minimum <= r.capacity, "reservoir '" + r.name + "': minimum outside [0, capacity]");
  }
  std::set<std::string> pumps;
  for (const PumpPair& p : pump_pairs) pumps.insert(p.pump);
  for (const HydroPlant& h : hydro) {
    require(names.insert("hydro:" + h.name).second, "duplicate hydro plant '" + h.name + "'");
    require(node_index(h.node) >= 0, "hydro plant '" + h.name + "': unknown node '" + h.node + "'");
    require(std::isfinite(h.specific_power) && h.specific_power != 0.0,
            "hydro plant '" + h.name + "': specific power must be finite and non-zero");
    require(h.specific_power > 0.0 || pumps.count(h.name),
            "hydro plant '" + h.name + "': negative specific power is only allowed for a declared pump");
    require(h.flow_capacity >= 0.0 && h.spill_capacity >= 0.0 && h.min_flow >= 0.0,
            "hydro plant '" + h.name + "': capacities must be non-negative");
    require(h.from.empty() || reservoir_index(h.from) >= 0, "hydro plant '" + h.name + "': unknown reservoir '" + h.from + "'");
    require(h.to.empty() || reservoir_index(h.to) >= 0, "hydro plant '" + h.name + "': unknown reservoir '" + h.to + "'");
    require(h.from.empty() || h.from != h.to, "hydro plant '" + h.name + "' flows into its own reservoir");
    require(h.min_flow <= h.flow_capacity + h.spill_capacity, "hydro plant '" + h.name + "': minimum flow exceeds capacity");
  }
  for (const PumpPair& p : pump_pairs) round_trip_efficiency(*this, p);
  for (const Peaker& p : peakers) {
    require(names.insert("peaker:" + p.name).second, "duplicate peaker '" + p.name + "'");
    require(node_index(p.node) >= 0, "peaker '" + p.name + "': unknown node '" + p.node + "'");
    require(p.capacity >= 0.0 && p.cost >= 0.0, "peaker '" + p.name + "': capacity and cost must be non-negative");
  }
  for (const Line& l : lines) {
    require(names.insert("line:" + l.name).second, "duplicate line '" + l.name + "'");
    require(node_index(l.from) >= 0 && node_index(l.to) >= 0, "line '" + l.name + "': unknown end node");
    require(l.from != l.to, "line '" + l.name + "' connects a node to itself");
    require(l.capacity >= 0.0, "line '" + l.name + "': capacity must be non-negative");
  }

  require(!weeks.empty(), "system has no weeks");
  for (std::size_t t = 0; t < weeks.size(); ++t) {
    const WeekBlocks& w = weeks[t];
    const std::string where = "week " + std::to_string(t + 1);
    require(!w.hours.empty(), where + ": no load blocks");
    double total = 0.0;
    for (double h : w.hours) {
      require(h > 0.0, where + ": block hours must be positive");
      total += h;
    }
    require(std::abs(total - kHoursPerWeek) < 1e-9, where + ": block hours sum to " + std::to_string(total) + ", not 168");
    require(w.demand.rows() == static_cast<Eigen::Index>(nodes.size()) &&
                w.demand.cols() == static_cast<Eigen::Index>(w.hours.size()),
            where + ": demand must be nodes x blocks");
    require(w.demand.allFinite() && (w.demand.array() >= 0.0).all(), where + ": demand must be finite and non-negative");
  }

  double total_fraction = 0.0;
  for (const LoadTranche& l : tranches) {
    require(l.fraction > 0.0 && l.fraction <= 1.0, "tranche '" + l.name + "': fraction must lie in (0, 1]");
    require(l.cost.size() >= 1 && (l.cost.array() >= 0.0).all() && l.cost.allFinite(),
            "tranche '" + l.name + "': costs must be finite and non-negative");
    for (const WeekBlocks& w : weeks) {
      require(l.cost.size() == 1 || l.cost.size() == static_cast<Eigen::Index>(w.hours.size()),
              "tranche '" + l.name + "': one cost per block required");
    }
    total_fraction += l.fraction;
  }
  require(total_fraction >= 1.0 - 1e-9, "shedding tranches must cover the whole load");

  require(!inflows.empty() || reservoirs.empty(), "system has reservoirs but no inflow years");
  for (std::size_t y = 0; y < inflows.size(); ++y) {
    require(inflows[y].size() == weeks.size(), "inflow year " + std::to_string(y + 1) + " does not cover every week");
    for (const Eigen::VectorXd& w : inflows[y]) {
      require(w.size() == static_cast<Eigen::Index>(reservoirs.size()), "inflows need one value per reservoir");
      require(w.allFinite() && (w.array() >= 0.0).all(), "inflows must be finite and non-negative");
    }
  }
  if (storage_penalty) require(*storage_penalty >= 0.0, "storage penalty must be non-negative");

  for (const WindLink& w : wind) {
    require(node_index(w.node) >= 0, "wind region '" + w.region + "': unknown node '" + w.node + "'");
    require(w.mu.size() == weeks.size(), "wind region '" + w.region + "': slopes must cover every week");
    for (std::size_t t = 0; t < weeks.size(); ++t) {
      require(w.mu[t].size() == static_cast<Eigen::Index>(weeks[t].hours.size()),
              "wind region '" + w.region + "': one slope per block required");
      require(w.mu[t].allFinite() && (w.mu[t].array() >= 0.0).all(),
              "wind region '" + w.region + "': slopes must be finite and non-negative");
    }
  }
}

Eigen::MatrixXd SystemData::incidence() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(reservoirs.size()),
                                            static_cast<Eigen::Index>(hydro.size()));
  for (std::size_t m = 0; m < hydro.size(); ++m) {
    if (!hydro[m].from.empty()) A(reservoir_index(hydro[m].from), m) += 1.0;
    if (!hydro[m].to.empty()) A(reservoir_index(hydro[m].to), m) -= 1.0;
  }
  return A;
}

double SystemData::default_storage_penalty() const {
  double shed = 0.0;
  for (const LoadTranche& l : tranches) shed = std::max(shed, l.cost.maxCoeff());
  double gamma = 0.0;
  for (const HydroPlant& h : hydro) gamma += std::max(h.specific_power, 0.0);
  return 2.0 * shed * gamma / kSecondsPerHour;
}

std::string storage_state(const std::string& reservoir) { return "storage[" + reservoir + "]"; }

StageTemplate build_stage(const SystemData& system, int week) {
  if (week < 0 || week >= system.num_weeks()) throw SystemError("week " + std::to_string(week + 1) + " out of range");
  const WeekBlocks& wk = system.weeks[week];
  const int B = static_cast<int>(wk.hours.size());
  const Eigen::MatrixXd A = system.incidence();

  StageTemplate t;
  t.name = "week_" + std::to_string(week + 1);
  t.week = week;
  lp::LpModel& m = t.model;

  std::vector<StateHandle> storage;
  for (const Reservoir& r : system.reservoirs) {
    storage.push_back(t.add_state(storage_state(r.name), 0.0, r.capacity / kStorageScale));
  }

  // Demand balance rows first; generation terms are appended per unit.
  for (std::size_t i = 0; i < system.nodes.size(); ++i) {
    for (int b = 0; b < B; ++b) {
      m.add_row(key("demand", system.nodes[i], b), std::vector<lp::Term>{}, lp::Sense::Equal, wk.demand(i, b));
    }
  }
  auto demand_row = [&](const std::string& node, int b) { return m.row_index(key("demand", node, b)); };

  for (const Peaker& p : system.peakers) {
    for (int b = 0; b < B; ++b) {
      const int f = m.add_variable(key("peaker", p.name, b), 0.0, p.capacity, wk.hours[b] * p.cost);
      m.set_coefficient(demand_row(p.node, b), f, 1.0);
    }
  }

  std::vector<int> balance(system.reservoirs.size());
  double week_hours = 0.0;
  for (double h : wk.hours) week_hours += h;
  for (std::size_t j = 0; j < system.reservoirs.size(); ++j) {
    const std::string& name = system.reservoirs[j].name;
    balance[j] = m.add_row("water_balance[" + name + "]", {{storage[j].out, 1.0}, {storage[j].in, -1.0}},
                           lp::Sense::Equal, 0.0);
    m.designate_dual("water_balance[" + name + "]");
    t.noise_terms.push_back({balance[j], static_cast<int>(j), volume(week_hours)});
  }

  for (std::size_t k = 0; k < system.hydro.size(); ++k) {
    const HydroPlant& h = system.hydro[k];
    if (h.is_pump()) continue;
    for (int b = 0; b < B; ++b) {
      const int rel = m.add_variable(key("release", h.name, b), 0.0, h.flow_capacity, 0.0);
      const int sp = m.add_variable(key("spill", h.name, b), 0.0, h.spill_capacity, 0.0);
      m.set_coefficient(demand_row(h.node, b), rel, h.specific_power);
      for (std::size_t j = 0; j < system.reservoirs.size(); ++j) {
        if (A(j, k) == 0.0) continue;
        m.set_coefficient(balance[j], rel, volume(wk.hours[b]) * A(j, k));
        m.set_coefficient(balance[j], sp, volume(wk.hours[b]) * A(j, k));
      }
      if (h.min_flow > 0.0) {
        m.add_row(key("min_flow", h.name, b), {{rel, 1.0}, {sp, 1.0}}, lp::Sense::GreaterEqual, h.min_flow);
      }
    }
  }

  for (std::size_t i = 0; i < system.nodes.size(); ++i) {
    for (const LoadTranche& l : system.tranches) {
      for (int b = 0; b < B; ++b) {
        const int z = m.add_variable(key("shed", system.nodes[i], l.name, b), 0.0, l.fraction * wk.demand(i, b),
                                     wk.hours[b] * tranche_cost(l, b));
        m.set_coefficient(demand_row(system.nodes[i], b), z, 1.0);
      }
    }
    const double fixed = system.fixed_generation.size() ? system.fixed_generation(i) : 0.0;
    if (fixed > 0.0) {
      for (int b = 0; b < B; ++b) {
        const int g = m.add_variable(key("fixed", system.nodes[i], b), 0.0, fixed, 0.0);
        m.set_coefficient(demand_row(system.nodes[i], b), g, 1.0);
      }
    }
  }

  for (const Line& l : system.lines) {
    for (int b = 0; b < B; ++b) {
      const int y = m.add_variable(key("flow", l.name, b), -l.capacity, l.capacity, 0.0);
      m.set_coefficient(demand_row(l.to, b), y, 1.0);
      m.set_coefficient(demand_row(l.from, b), y, -1.0);
    }
  }

  const double penalty = system.penalty() * kStorageScale;
  for (std::size_t j = 0; j < system.reservoirs.size(); ++j) {
    const Reservoir& r = system.reservoirs[j];
    if (r.minimum <= 0.0) continue;
    const int v = m.add_variable("below_minimum[" + r.name + "]", 0.0, r.minimum / kStorageScale, penalty);
    m.add_row("storage_floor[" + r.name + "]", {{storage[j].out, 1.0}, {v, 1.0}}, lp::Sense::GreaterEqual,
              r.minimum / kStorageScale);
  }

  t.add_cost_to_go();
  return t;
}

double round_trip_efficiency(const SystemData& system, const PumpPair& pair) {
  const int p = system.hydro_index(pair.pump);
  const int g = system.hydro_index(pair.generator);
  require(p >= 0, "unknown pump '" + pair.pump + "'");
  require(g >= 0, "unknown generator '" + pair.generator + "'");
  const HydroPlant& pump = system.hydro[p];
  const HydroPlant& gen = system.hydro[g];
  require(pump.specific_power < 0.0, "pump '" + pump.name + "' must have negative specific power");
  require(gen.specific_power > 0.0, "generator '" + gen.name + "' must have positive specific power");
  require(!pump.to.empty() && pump.to == gen.from,
          "pump '" + pump.name + "' and generator '" + gen.name + "' must share the upper reservoir");
  require(pump.spill_capacity == 0.0, "pump '" + pump.name + "' cannot spill");
  const double eff = std::abs(gen.specific_power / pump.specific_power);
  require(eff < 1.0, "pump pair '" + pump.name + "'/'" + gen.name + "' would create energy");
  return eff;
}

double apply_pumping(StageTemplate& stage, const SystemData& system, const PumpPair& pair) {
  const double eff = round_trip_efficiency(system, pair);
  const int k = system.hydro_index(pair.pump);
  const HydroPlant& pump = system.hydro[k];
  const WeekBlocks& wk = system.weeks.at(stage.week);
  const Eigen::MatrixXd A = system.incidence();
  lp::LpModel& m = stage.model;
  for (int b = 0; b < static_cast<int>(wk.hours.size()); ++b) {
    if (m.find_variable(key("release", pump.name, b)) >= 0) throw SystemError("pump '" + pump.name + "' applied twice");
    const int rel = m.add_variable(key("release", pump.name, b), 0.0, pump.flow_capacity, 0.0);
    m.set_coefficient(m.row_index(key("demand", pump.node, b)), rel, pump.specific_power);
    for (std::size_t j = 0; j < system.reservoirs.size(); ++j) {
      if (A(j, k) == 0.0) continue;
      m.set_coefficient(m.row_index("water_balance[" + system.reservoirs[j].name + "]"), rel,
                        volume(wk.hours[b]) * A(j, k));
    }
  }
  return eff;
}

void apply_investment_links(StageTemplate& stage, const SystemData& system, const InvestmentSpec& spec) {
  spec.validate();
  const WeekBlocks& wk = system.weeks.at(stage.week);
  const int B = static_cast<int>(wk.hours.size());
  lp::LpModel& m = stage.model;
  std::set<std::string> targets;

  for (const InvestmentCandidate& c : spec.candidates) {
    const StateHandle cap = stage.add_state(capacity_state(c.name), 0.0, lp::kInf);
    m.add_row("carry[" + capacity_state(c.name) + "]", {{cap.out, 1.0}, {cap.in, -1.0}}, lp::Sense::Equal, 0.0);

    switch (c.kind) {
      case InvestmentKind::Peaker: {
        const int p = system.peaker_index(c.target);
        require(p >= 0, "candidate '" + c.name + "': unknown peaker '" + c.target + "'");
        require(targets.insert("peaker:" + c.target).second, "peaker '" + c.target + "' targeted twice");
        for (int b = 0; b < B; ++b) {
          const int f = m.variable_index(key("peaker", c.target, b));
          m.set_bounds(f, 0.0, lp::kInf);
          m.add_row(key("peaker_capacity", c.target, b), {{f, 1.0}, {cap.in, -1.0}}, lp::Sense::LessEqual,
                    system.peakers[p].capacity);
        }
        break;
      }
      case InvestmentKind::Line: {
        const int l = system.line_index(c.target);
        require(l >= 0, "candidate '" + c.name + "': unknown line '" + c.target + "'");
        require(targets.insert("line:" + c.target).second, "line '" + c.target + "' targeted twice");
        const double limit = system.lines[l].capacity;
        for (int b = 0; b < B; ++b) {
          const int y = m.variable_index(key("flow", c.target, b));
          m.set_bounds(y, -lp::kInf, lp::kInf);
          m.add_row(key("line_forward", c.target, b), {{y, 1.0}, {cap.in, -1.0}}, lp::Sense::LessEqual, limit);
          m.add_row(key("line_reverse", c.target, b), {{y, -1.0}, {cap.in, -1.0}}, lp::Sense::LessEqual, limit);
        }
        break;
      }
      case InvestmentKind::Wind: {
        int links = 0;
        for (const WindLink& w : system.wind) {
          if (w.candidate != c.name) continue;
          ++links;
          for (int b = 0; b < B; ++b) {
            const int v = m.add_variable(key("wind", c.name, w.region, b), 0.0, lp::kInf, 0.0);
            m.set_coefficient(m.row_index(key("demand", w.node, b)), v, 1.0);
            m.add_row(key("wind_limit", c.name, w.region, b), {{v, 1.0}, {cap.in, -w.mu[stage.week](b)}},
                      lp::Sense::LessEqual, 0.0);
          }
        }
        require(links > 0, "wind candidate '" + c.name + "' has no wind slopes");
        break;
      }
    }
  }
}

Problem build_cyclic_problem(const SystemData& system, const InvestmentSpec& spec, const ProblemOptions& options) {
  system.validate();
  spec.validate();
  const int W = system.num_weeks();
  const int per_year = options.stages_per_year > 0 ? options.stages_per_year : W;

  Problem problem;
  for (int t = 0; t < W; ++t) {
    StageTemplate stage = build_stage(system, t);
    for (const PumpPair& p : system.pump_pairs) apply_pumping(stage, system, p);
    apply_investment_links(stage, system, spec);
    problem.templates.push_back(std::move(stage));
  }

  problem.graph = cyclic_graph(W, stage_discount(system.annual_discount, per_year));
  for (int t = 0; t < W; ++t) {
    std::vector<Eigen::VectorXd> outcomes;
    for (const auto& year : system.inflows) outcomes.push_back(year[t]);
    if (outcomes.empty()) outcomes.push_back(Eigen::VectorXd());
    problem.graph.set_noise(t, NoiseDistribution::uniform(outcomes));
  }

  const int R = static_cast<int>(system.reservoirs.size());
  problem.initial_state = Eigen::VectorXd::Zero(R + spec.size());
  for (int j = 0; j < R; ++j) problem.initial_state(j) = system.reservoirs[j].initial / kStorageScale;

  if (options.investment_root) return add_investment_root(std::move(problem), spec);
  if (options.fixed_capacity.size() != 0) {
    if (options.fixed_capacity.size() != spec.size()) throw SystemError("one fixed capacity per candidate required");
    if ((options.fixed_capacity.array() < 0.0).any()) throw SystemError("fixed capacities must be non-negative");
    problem.initial_state.tail(spec.size()) = options.fixed_capacity;
  }
  return problem;
}

std::vector<std::vector<Eigen::VectorXd>> historical_sequences(const SystemData& system, int cycles) {
  if (cycles < 1) throw SystemError("historical simulation needs at least one cycle");
  std::vector<std::vector<Eigen::VectorXd>> out;
  for (const auto& year : system.inflows) {
    std::vector<Eigen::VectorXd> seq;
    for (int c = 0; c < cycles; ++c) seq.insert(seq.end(), year.begin(), year.end());
    out.push_back(std::move(seq));
  }
  return out;
}

StageOutcome decode_stage(const SystemData& system, const StageTemplate& stage, const Eigen::VectorXd& primal,
                          const Eigen::VectorXd& duals, const Eigen::VectorXd& state_out) {
  const lp::LpModel& m = stage.model;
  const WeekBlocks& wk = system.weeks.at(stage.week);
  const int B = static_cast<int>(wk.hours.size());
  const int R = static_cast<int>(system.reservoirs.size());
  StageOutcome o;
  o.storage = state_out.head(R) * kStorageScale;
  o.water_value = -duals.head(R) / kStorageScale;
  o.below_minimum = Eigen::VectorXd::Zero(R);
  if (primal.size() == 0) return o;

  auto value = [&](const std::string& name) {
    const int v = m.find_variable(name);
    return v < 0 ? 0.0 : primal(v);
  };
  for (const std::string& node : system.nodes) {
    for (const LoadTranche& l : system.tranches) {
      for (int b = 0; b < B; ++b) o.shedding_mwh += wk.hours[b] * value(key("shed", node, l.name, b));
    }
  }
  o.line_flow = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(system.lines.size()));
  for (std::size_t l = 0; l < system.lines.size(); ++l) {
    for (int b = 0; b < B; ++b) o.line_flow(l) += wk.hours[b] * value(key("flow", system.lines[l].name, b));
    o.line_flow(l) /= kHoursPerWeek;
  }
  const Eigen::Index H = static_cast<Eigen::Index>(system.hydro.size());
  o.release = Eigen::MatrixXd::Zero(H, B);
  o.spill = Eigen::MatrixXd::Zero(H, B);
  for (Eigen::Index k = 0; k < H; ++k) {
    for (int b = 0; b < B; ++b) {
      o.release(k, b) = value(key("release", system.hydro[k].name, b));
      o.spill(k, b) = value(key("spill", system.hydro[k].name, b));
    }
  }
  for (int j = 0; j < R; ++j) o.below_minimum(j) = value("below_minimum[" + system.reservoirs[j].name + "]") * kStorageScale;
  return o;
}

double max_row_residual(const StageTemplate& stage, const Eigen::VectorXd& state_in, const Eigen::VectorXd& payload,
                        const Eigen::VectorXd& primal, const std::string& prefix) {
  lp::LpModel work = stage.model;
  stage.instantiate(work, state_in, payload);
  double worst = 0.0;
  for (const lp::Constraint& row : work.rows()) {
    if (row.name.rfind(prefix, 0) != 0) continue;
    double lhs = 0.0;
    for (const lp::Term& t : row.terms) lhs += t.coef * primal(t.var);
    worst = std::max(worst, std::abs(lhs - row.rhs));
  }
  return worst;
}

}  // namespace hydrosddp
