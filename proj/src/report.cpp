#include "hydrosddp/report.hpp"

#include "hydrosddp/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace hydrosddp {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "hydrosddp-policy";
constexpr int kVersion = 1;

std::vector<std::string> node_names(const Problem& problem) {
  std::vector<std::string> out;
  for (const GraphNode& n : problem.graph.nodes()) out.push_back(n.name);
  return out;
}

}  // namespace

std::string policy_to_json(const Problem& problem, const Policy& policy, bool zero_time) {
  policy.check_compatible(problem);
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["state_names"] = policy.state_names;
  j["iterations"] = policy.iterations;
  json nodes = json::array();
  const std::vector<std::string> names = node_names(problem);
  for (std::size_t v = 0; v < policy.pools.size(); ++v) {
    json cuts = json::array();
    const CutPool& pool = policy.pools[v];
    for (int k = 0; k < pool.size(); ++k) {
      const Cut c = pool.cut(k);
      cuts.push_back({{"intercept", c.intercept},
                      {"slope", std::vector<double>(c.slope.data(), c.slope.data() + c.slope.size())},
                      {"iteration", c.iteration}});
    }
    nodes.push_back({{"name", names[v]}, {"cuts", std::move(cuts)}});
  }
  j["nodes"] = std::move(nodes);
  json log = json::array();
  for (const TrainingRecord& r : policy.log) {
    log.push_back({{"iteration", r.iteration}, {"lower_bound", r.lower_bound}, {"forward_cost", r.forward_cost},
                   {"wall_time_s", zero_time ? 0.0 : r.wall_time_s}});
  }
  j["log"] = std::move(log);
  return j.dump(1);
}

Policy policy_from_json(const std::string& text, const Problem& problem) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TrainingError(std::string("policy file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw TrainingError("not a policy file");
    if (j.at("version").get<int>() != kVersion) {
      throw TrainingError("unsupported policy version " + j.at("version").dump());
    }
    Policy p = Policy::empty(problem);
    if (j.at("state_names").get<std::vector<std::string>>() != p.state_names) {
      throw TrainingError("policy state names do not match the configured system");
    }
    const json& nodes = j.at("nodes");
    const std::vector<std::string> names = node_names(problem);
    if (nodes.size() != names.size()) throw TrainingError("policy node count does not match the configured system");
    for (std::size_t v = 0; v < names.size(); ++v) {
      if (nodes[v].at("name") != names[v]) throw TrainingError("policy node '" + nodes[v].at("name").get<std::string>() + "' does not match");
      for (const json& c : nodes[v].at("cuts")) {
        const std::vector<double> s = c.at("slope").get<std::vector<double>>();
        if (static_cast<int>(s.size()) != problem.num_states()) throw TrainingError("cut dimension mismatch in policy file");
        p.pools[v].add(c.at("intercept").get<double>(), Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size())),
                       c.at("iteration").get<int>());
      }
    }
    p.iterations = j.at("iterations").get<int>();
    for (const json& r : j.at("log")) {
      p.log.push_back({r.at("iteration").get<int>(), r.at("lower_bound").get<double>(), r.at("forward_cost").get<double>(),
                       r.at("wall_time_s").get<double>()});
    }
    return p;
  } catch (const json::exception& e) {
    throw TrainingError(std::string("malformed policy file: ") + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const Problem& problem, const Policy& policy, bool zero_time) {
  write_atomic(path, policy_to_json(problem, policy, zero_time));
}

Policy load_policy(const std::filesystem::path& path, const Problem& problem) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open policy file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return policy_from_json(buffer.str(), problem);
}

std::string training_log_csv(const Policy& policy, bool zero_time) {
  CsvWriter w({"iteration", "lower_bound", "forward_cost", "wall_time_s"});
  for (const TrainingRecord& r : policy.log) {
    w.row({std::to_string(r.iteration), format_number(r.lower_bound), format_number(r.forward_cost),
           format_number(zero_time ? 0.0 : r.wall_time_s)});
  }
  return w.str();
}

std::vector<DurationPoint> duration_curve(const std::vector<double>& series, const std::vector<double>& weights) {
  if (series.empty()) throw std::invalid_argument("duration curve of an empty series");
  if (!weights.empty() && weights.size() != series.size()) throw std::invalid_argument("one weight per value required");
  std::vector<int> order(series.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return series[a] > series[b]; });
  double total = weights.empty() ? static_cast<double>(series.size()) : std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("duration curve weights must be positive");
  std::vector<DurationPoint> out;
  double acc = 0.0;
  for (int k : order) {
    acc += weights.empty() ? 1.0 : weights[k];
    out.push_back({series[k], acc / total});
  }
  return out;
}

double percentile(std::vector<double> data, double q) {
  if (data.empty()) throw std::invalid_argument("percentile of empty data");
  std::sort(data.begin(), data.end());
  const double pos = q / 100.0 * static_cast<double>(data.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  return data[lo] + (pos - static_cast<double>(lo)) * (data[hi] - data[lo]);
}

double SimulationReport::mean_cost() const {
  return total_cost.empty() ? 0.0 : std::accumulate(total_cost.begin(), total_cost.end(), 0.0) / total_cost.size();
}

double SimulationReport::mean_discounted_cost() const {
  return discounted_cost.empty() ? 0.0
                                 : std::accumulate(discounted_cost.begin(), discounted_cost.end(), 0.0) / discounted_cost.size();
}

double SimulationReport::discounted_standard_error() const {
  const std::size_t n = discounted_cost.size();
  if (n < 2) return 0.0;
  const double m = mean_discounted_cost();
  double ss = 0.0;
  for (double c : discounted_cost) ss += (c - m) * (c - m);
  return std::sqrt(ss / (n - 1) / n);
}

SimulationReport build_report(const SystemData& system, const Problem& problem, const std::vector<Trajectory>& trajectories) {
  SimulationReport rep;
  for (const Reservoir& r : system.reservoirs) rep.reservoirs.push_back(r.name);
  for (const Line& l : system.lines) rep.lines.push_back(l.name);
  const auto inv = problem.graph.investment_node();

  std::map<std::pair<std::string, int>, std::vector<double>> samples;
  for (std::size_t r = 0; r < trajectories.size(); ++r) {
    const Trajectory& tr = trajectories[r];
    rep.total_cost.push_back(tr.total_cost());
    rep.discounted_cost.push_back(tr.discounted_cost());
    int step = 0;
    for (const TrajectoryStep& s : tr.steps) {
      if (inv && s.node == *inv) continue;
      const StageTemplate& tpl = problem.templates[problem.graph.node(s.node).stage_template];
      StageRecord rec;
      rec.replication = static_cast<int>(r);
      rec.step = step;
      rec.node = s.node;
      rec.week = tpl.week;
      rec.stage_cost = s.stage_cost;
      rec.weight = s.weight;
      rec.outcome = decode_stage(system, tpl, s.primal, s.duals, s.state_out);
      samples[{"stage_cost", step}].push_back(rec.stage_cost);
      samples[{"shedding_mwh", step}].push_back(rec.outcome.shedding_mwh);
      for (std::size_t j = 0; j < rep.reservoirs.size(); ++j) {
        samples[{"storage[" + rep.reservoirs[j] + "]", step}].push_back(rec.outcome.storage(j));
        samples[{"water_value[" + rep.reservoirs[j] + "]", step}].push_back(rec.outcome.water_value(j));
      }
      for (std::size_t l = 0; l < rep.lines.size() && rec.outcome.line_flow.size(); ++l) {
        samples[{"flow[" + rep.lines[l] + "]", step}].push_back(rec.outcome.line_flow(l));
      }
      rep.records.push_back(std::move(rec));
      ++step;
    }
  }
  for (const auto& [k, v] : samples) {
    PercentileBand b;
    b.quantity = k.first;
    b.step = k.second;
    b.count = static_cast<int>(v.size());
    b.p10 = percentile(v, 10);
    b.p25 = percentile(v, 25);
    b.p50 = percentile(v, 50);
    b.p75 = percentile(v, 75);
    b.p90 = percentile(v, 90);
    rep.bands.push_back(std::move(b));
  }
  return rep;
}

void write_report(const SimulationReport& report, const std::filesystem::path& dir) {
  std::vector<std::string> head{"replication", "step", "week", "stage_cost", "weight", "shedding_mwh"};
  for (const std::string& r : report.reservoirs) head.push_back("storage_m3[" + r + "]");
  for (const std::string& r : report.reservoirs) head.push_back("water_value_per_m3[" + r + "]");
  for (const std::string& l : report.lines) head.push_back("flow_mw[" + l + "]");
  CsvWriter stages(head);
  std::vector<double> shedding;
  for (const StageRecord& rec : report.records) {
    std::vector<std::string> row{std::to_string(rec.replication), std::to_string(rec.step), std::to_string(rec.week + 1),
                                 format_number(rec.stage_cost), format_number(rec.weight),
                                 format_number(rec.outcome.shedding_mwh)};
    for (Eigen::Index j = 0; j < rec.outcome.storage.size(); ++j) row.push_back(format_number(rec.outcome.storage(j)));
    for (Eigen::Index j = 0; j < rec.outcome.water_value.size(); ++j) row.push_back(format_number(rec.outcome.water_value(j)));
    for (std::size_t l = 0; l < report.lines.size(); ++l) {
      row.push_back(format_number(rec.outcome.line_flow.size() ? rec.outcome.line_flow(l) : 0.0));
    }
    stages.row(row);
    shedding.push_back(rec.outcome.shedding_mwh);
  }
  write_atomic(dir / "simulation_stages.csv", stages.str());

  CsvWriter bands({"quantity", "step", "count", "p10", "p25", "p50", "p75", "p90"});
  for (const PercentileBand& b : report.bands) {
    bands.row({b.quantity, std::to_string(b.step), std::to_string(b.count), format_number(b.p10), format_number(b.p25),
               format_number(b.p50), format_number(b.p75), format_number(b.p90)});
  }
  write_atomic(dir / "simulation_bands.csv", bands.str());

  CsvWriter summary({"replication", "total_cost", "discounted_cost"});
  for (std::size_t r = 0; r < report.total_cost.size(); ++r) {
    summary.row({std::to_string(r), format_number(report.total_cost[r]), format_number(report.discounted_cost[r])});
  }
  write_atomic(dir / "simulation_summary.csv", summary.str());

  if (!shedding.empty()) {
    CsvWriter curve({"shedding_mwh", "exceedance"});
    for (const DurationPoint& p : duration_curve(shedding)) curve.row({format_number(p.value), format_number(p.exceedance)});
    write_atomic(dir / "shedding_duration.csv", curve.str());
  }
}

}  // namespace hydrosddp
