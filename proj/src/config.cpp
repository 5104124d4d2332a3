#include "hydrosddp/config.hpp"

#include "hydrosddp/csv.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace hydrosddp {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& reason) {
  throw InputError("config: " + where + ": " + reason);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array");
  std::vector<double> out;
  for (const json& v : j) out.push_back(number(v, where));
  return out;
}

// Either an explicit list or {"min", "max", "points"}.
std::vector<double> grid(const json& j, const std::string& where) {
  if (j.is_array()) return numbers(j, where);
  if (!j.is_object()) bad(where, "expected a list or {min, max, points}");
  const double lo = number(j.at("min"), where + ".min");
  const double hi = number(j.at("max"), where + ".max");
  const int n = integer(j.at("points"), where + ".points");
  if (n < 1) bad(where, "points must be positive");
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  return out;
}

std::filesystem::path file(const json& data, const char* name, const std::filesystem::path& base) {
  if (!data.contains(name) || data.at(name).is_null()) return {};
  std::filesystem::path p = string(data.at(name), std::string("data.") + name);
  return p.is_absolute() ? p : base / p;
}

InvestmentCandidate candidate(const json& j, double beta, int index) {
  const std::string where = "investment.candidates[" + std::to_string(index) + "]";
  InvestmentCandidate c;
  c.name = string(j.at("name"), where + ".name");
  c.kind = parse_investment_kind(string(j.at("kind"), where + ".kind"));
  if (j.contains("target")) c.target = string(j.at("target"), where + ".target");
  if (j.contains("regions")) {
    for (const json& r : j.at("regions")) c.regions.push_back(string(r, where + ".regions"));
  }
  if (j.contains("lifetime") && !j.at("lifetime").is_null()) c.lifetime = number(j.at("lifetime"), where + ".lifetime");
  if (j.contains("upper_bound") && !j.at("upper_bound").is_null()) {
    c.upper_bound = number(j.at("upper_bound"), where + ".upper_bound");
  }
  if (j.contains("overnight_cost")) {
    c.overnight_cost = number(j.at("overnight_cost"), where + ".overnight_cost");
  } else if (j.contains("lcoe")) {
    const json& l = j.at("lcoe");
    LcoeAssumptions a;
    a.lcoe = number(l.at("lcoe"), where + ".lcoe.lcoe");
    a.capacity_factor = number(l.at("capacity_factor"), where + ".lcoe.capacity_factor");
    if (l.contains("hours_per_year")) a.hours_per_year = number(l.at("hours_per_year"), where + ".lcoe.hours_per_year");
    a.lifetime = c.lifetime.value_or(std::numeric_limits<double>::infinity());
    a.discount = beta;
    c.overnight_cost = lcoe_to_overnight(a);
  } else {
    bad(where, "needs overnight_cost or lcoe");
  }
  return c;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  try {
    if (!root.is_object()) bad("root", "expected an object");
    const json& data = root.at("data");
    cfg.files.reservoirs = file(data, "reservoirs", base_dir);
    cfg.files.hydro = file(data, "hydro", base_dir);
    cfg.files.peakers = file(data, "peakers", base_dir);
    cfg.files.lines = file(data, "lines", base_dir);
    cfg.files.fixed_generation = file(data, "fixed_generation", base_dir);
    cfg.files.demand = file(data, "demand", base_dir);
    cfg.files.inflows = file(data, "inflows", base_dir);
    cfg.files.wind = file(data, "wind", base_dir);
    cfg.files.shares = file(data, "shares", base_dir);
    if (cfg.files.demand.empty()) bad("data.demand", "required");

    for (const json& n : root.at("nodes")) cfg.nodes.push_back(string(n, "nodes"));
    if (root.contains("annual_discount")) cfg.annual_discount = number(root.at("annual_discount"), "annual_discount");
    if (root.contains("stages_per_year")) cfg.stages_per_year = integer(root.at("stages_per_year"), "stages_per_year");
    for (const json& h : root.at("blocks").at("hours")) cfg.block_hours.push_back(integer(h, "blocks.hours"));

    int k = 0;
    for (const json& s : root.at("shedding")) {
      const std::string where = "shedding[" + std::to_string(k++) + "]";
      LoadTranche t;
      t.name = string(s.at("name"), where + ".name");
      t.fraction = number(s.at("fraction"), where + ".fraction");
      const std::vector<double> cost =
          s.at("cost").is_array() ? numbers(s.at("cost"), where + ".cost") : std::vector<double>{number(s.at("cost"), where + ".cost")};
      t.cost = Eigen::Map<const Eigen::VectorXd>(cost.data(), static_cast<Eigen::Index>(cost.size()));
      cfg.tranches.push_back(std::move(t));
    }
    if (root.contains("pump_pairs")) {
      for (const json& p : root.at("pump_pairs")) {
        cfg.pump_pairs.push_back({string(p.at("pump"), "pump_pairs.pump"), string(p.at("generator"), "pump_pairs.generator")});
      }
    }
    if (root.contains("storage_penalty_per_m3")) {
      cfg.storage_penalty = number(root.at("storage_penalty_per_m3"), "storage_penalty_per_m3");
    }
    if (root.contains("wind")) {
      const json& w = root.at("wind");
      if (w.contains("grid_mw")) cfg.wind.grid = grid(w.at("grid_mw"), "wind.grid_mw");
      if (w.contains("nominal_mw")) cfg.wind.nominal = number(w.at("nominal_mw"), "wind.nominal_mw");
    }
    cfg.wind.block_hours = cfg.block_hours;

    cfg.investment.annual_discount = cfg.annual_discount;
    if (root.contains("investment")) {
      int i = 0;
      for (const json& c : root.at("investment").at("candidates")) {
        cfg.investment.candidates.push_back(candidate(c, cfg.annual_discount, i++));
      }
    }
    if (root.contains("enumeration")) {
      for (const auto& [name, g] : root.at("enumeration").items()) {
        cfg.enumeration_grid[name] = grid(g, "enumeration." + name);
      }
    }

    if (root.contains("training")) {
      const json& t = root.at("training");
      if (t.contains("iterations")) cfg.training.iterations = integer(t.at("iterations"), "training.iterations");
      if (t.contains("seed")) cfg.training.seed = t.at("seed").get<std::uint64_t>();
      if (t.contains("eval_cadence")) cfg.training.eval_cadence = integer(t.at("eval_cadence"), "training.eval_cadence");
      if (t.contains("max_depth_cycles")) {
        cfg.training.max_depth_cycles = integer(t.at("max_depth_cycles"), "training.max_depth_cycles");
      }
      if (t.contains("threads")) cfg.training.threads = integer(t.at("threads"), "training.threads");
      if (t.contains("forward_passes")) cfg.training.forward_passes = integer(t.at("forward_passes"), "training.forward_passes");
    }
    if (root.contains("simulation")) {
      const json& s = root.at("simulation");
      if (s.contains("mode")) {
        const std::string mode = string(s.at("mode"), "simulation.mode");
        if (mode != "historical" && mode != "in-sample") bad("simulation.mode", "expected historical or in-sample");
        cfg.simulation.historical = mode == "historical";
      }
      if (s.contains("replications")) cfg.simulation.replications = integer(s.at("replications"), "simulation.replications");
      if (s.contains("cycles")) cfg.simulation.cycles = integer(s.at("cycles"), "simulation.cycles");
      if (s.contains("seed")) cfg.simulation.seed = s.at("seed").get<std::uint64_t>();
      if (s.contains("estimator")) {
        const std::string e = string(s.at("estimator"), "simulation.estimator");
        if (e != "sampled" && e != "discounted") bad("simulation.estimator", "expected sampled or discounted");
        cfg.simulation.estimator = e == "sampled" ? Estimator::Sampled : Estimator::Discounted;
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }

  if (cfg.nodes.empty()) throw InputError("config: nodes: at least one network node required");
  if (cfg.block_hours.empty()) throw InputError("config: blocks.hours: at least one block required");
  if (cfg.training.iterations <= 0) throw InputError("config: training.iterations must be positive");
  if (cfg.training.eval_cadence <= 0) throw InputError("config: training.eval_cadence must be positive");
  if (cfg.training.threads <= 0) throw InputError("config: training.threads must be positive");
  if (cfg.training.max_depth_cycles <= 0) throw InputError("config: training.max_depth_cycles must be positive");
  cfg.investment.validate();
  for (const auto& [name, g] : cfg.enumeration_grid) {
    bool known = false;
    for (const InvestmentCandidate& c : cfg.investment.candidates) known |= c.name == name;
    if (!known) throw InputError("config: enumeration: unknown candidate '" + name + "'");
    if (g.empty()) throw InputError("config: enumeration: empty grid for '" + name + "'");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open config");
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig cfg = parse_config(buffer.str(), path.parent_path());
  cfg.source = path;
  return cfg;
}

}  // namespace hydrosddp
