#include "hydrosddp/commands.hpp"

#include "hydrosddp/csv.hpp"

#include <exception>
#include <ostream>
#include <thread>

namespace hydrosddp {

RunConfig apply_overrides(RunConfig config, const CommandOptions& options) {
  if (options.seed) {
    config.training.seed = *options.seed;
    config.simulation.seed = *options.seed;
  }
  if (options.iterations) config.training.iterations = *options.iterations;
  if (options.threads) config.training.threads = *options.threads;
  if (options.eval_cadence) config.training.eval_cadence = *options.eval_cadence;
  if (config.training.iterations <= 0) throw InputError("--iterations must be positive");
  if (config.training.threads <= 0) throw InputError("--threads must be positive");
  if (config.training.eval_cadence <= 0) throw InputError("--eval-cadence must be positive");
  return config;
}

Problem build_problem(const LoadedSystem& loaded, const RunConfig& config) {
  ProblemOptions po;
  po.stages_per_year = config.stages_per_year;
  po.investment_root = loaded.investment.size() > 0;
  return build_cyclic_problem(loaded.system, loaded.investment, po);
}

TrainingOptions training_options(const RunConfig& config, int max_depth_cycles_override) {
  TrainingOptions t;
  t.iterations = config.training.iterations;
  t.seed = config.training.seed;
  t.forward_passes = config.training.forward_passes;
  t.max_depth_cycles = max_depth_cycles_override > 0 ? max_depth_cycles_override : config.training.max_depth_cycles;
  t.threads = config.training.threads;
  return t;
}

int cmd_linearize_wind(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const LoadedSystem loaded = load_system(config);
  const WindSlopeTable table = national_wind_slopes(loaded, config);
  CsvWriter w({"region", "week", "block", "mu", "clamped_flag", "residual_norm"});
  for (int t = 0; t < table.num_weeks(); ++t) {
    for (std::size_t r = 0; r < table.regions.size(); ++r) {
      for (int b = 0; b < table.num_blocks(); ++b) {
        const bool clamped = table.raw_mu[t](r, b) < 0.0;
        w.row({table.regions[r], std::to_string(t + 1), std::to_string(b + 1), format_number(table.mu[t](r, b)),
               clamped ? "1" : "0", format_number(table.residual[t](r, b))});
      }
    }
  }
  write_atomic(options.out / "wind_slopes.csv", w.str());
  const int clamped = table.clamped_count();
  log << "wind slopes: " << table.num_weeks() * table.regions.size() * table.num_blocks() << " entries, " << clamped
      << " clamped to zero\n";
  if (clamped > 0) {
    for (int t = 0; t < table.num_weeks(); ++t) {
      for (std::size_t r = 0; r < table.regions.size(); ++r) {
        for (int b = 0; b < table.num_blocks(); ++b) {
          if (table.raw_mu[t](r, b) < 0.0) {
            log << "warning: negative slope " << format_number(table.raw_mu[t](r, b)) << " for region " << table.regions[r]
                << ", week " << t + 1 << ", block " << b + 1 << "\n";
          }
        }
      }
    }
  }
  return clamped;
}

Policy cmd_train(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const LoadedSystem loaded = load_system(config);
  const Problem problem = build_problem(loaded, config);
  TrainingOptions topt = training_options(config);

  std::vector<std::string> head{"iteration", "lower_bound"};
  for (const InvestmentCandidate& c : loaded.investment.candidates) head.push_back(c.name);
  CsvWriter investments(head);
  const int cadence = config.training.eval_cadence;
  topt.on_iteration = [&](const Policy& policy, const TrainingRecord& rec) {
    if (rec.iteration % cadence != 0) return;
    std::vector<std::string> row{std::to_string(rec.iteration), format_number(rec.lower_bound)};
    if (problem.graph.investment_node()) {
      const Eigen::VectorXd u = first_stage_solution(problem, policy);
      for (Eigen::Index k = 0; k < u.size(); ++k) row.push_back(format_number(u(k)));
    }
    investments.row(row);
    log << "iteration " << rec.iteration << ": lower bound " << format_number(rec.lower_bound) << "\n";
  };

  const Policy policy = train(problem, topt);
  save_policy(options.policy.empty() ? options.out / "policy.json" : options.policy, problem, policy,
              options.reproducible);
  write_atomic(options.out / "training_log.csv", training_log_csv(policy, options.reproducible));
  write_atomic(options.out / "investments.csv", investments.str());
  log << "trained " << policy.iterations << " iterations, " << policy.total_cuts() << " cuts, lower bound "
      << format_number(policy.log.back().lower_bound) << "\n";
  return policy;
}

SimulationReport cmd_simulate(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const LoadedSystem loaded = load_system(config);
  const Problem problem = build_problem(loaded, config);
  const Policy policy = load_policy(options.policy.empty() ? options.out / "policy.json" : options.policy, problem);

  SimulationOptions so;
  so.seed = config.simulation.seed;
  so.keep_primal = true;
  so.threads = config.training.threads;
  so.estimator = config.simulation.estimator;
  std::vector<Trajectory> trajectories;
  if (config.simulation.historical) {
    const auto sequences = historical_sequences(loaded.system, config.simulation.cycles);
    trajectories = simulate(problem, policy, ScenarioSource::from_history(sequences), static_cast<int>(sequences.size()), so);
  } else {
    trajectories = simulate(problem, policy, ScenarioSource::in_sample(), config.simulation.replications, so);
  }
  const SimulationReport report = build_report(loaded.system, problem, trajectories);
  write_report(report, options.out);
  log << "simulated " << trajectories.size() << " trajectories, mean cost " << format_number(report.mean_cost())
      << ", mean discounted cost " << format_number(report.mean_discounted_cost()) << "\n";
  return report;
}

double cmd_bound(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const LoadedSystem loaded = load_system(config);
  const Problem problem = build_problem(loaded, config);
  const Policy policy = load_policy(options.policy.empty() ? options.out / "policy.json" : options.policy, problem);
  const double bound = lower_bound(problem, policy);
  log << format_number(bound) << "\n";
  return bound;
}

EnumerationResult enumerate_investments(const LoadedSystem& loaded, const RunConfig& config,
                                        const std::map<std::string, std::vector<double>>& grid, int threads) {
  EnumerationResult result;
  const InvestmentSpec& spec = loaded.investment;
  std::vector<std::vector<double>> axes;
  for (const InvestmentCandidate& c : spec.candidates) {
    result.candidates.push_back(c.name);
    const auto it = grid.find(c.name);
    axes.push_back(it == grid.end() ? std::vector<double>{0.0} : it->second);
    if (axes.back().empty()) throw InputError("enumeration grid for '" + c.name + "' is empty");
  }
  for (const auto& [name, g] : grid) {
    bool known = false;
    for (const std::string& c : result.candidates) known |= c == name;
    if (!known) throw InputError("enumeration grid names unknown candidate '" + name + "'");
  }

  std::size_t points = 1;
  for (const auto& a : axes) points *= a.size();
  result.rows.resize(points);
  const Eigen::VectorXd cost = spec.unit_costs();
  for (std::size_t p = 0; p < points; ++p) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(axes.size()));
    std::size_t rest = p;
    for (std::size_t k = axes.size(); k-- > 0;) {
      u(k) = axes[k][rest % axes[k].size()];
      rest /= axes[k].size();
    }
    result.rows[p].capacity = u;
    result.rows[p].capex = cost.dot(u);
  }

  auto run = [&](std::size_t p) {
    ProblemOptions po;
    po.stages_per_year = config.stages_per_year;
    po.investment_root = false;
    po.fixed_capacity = result.rows[p].capacity;
    const Problem problem = build_cyclic_problem(loaded.system, spec, po);
    TrainingOptions topt = training_options(config);
    topt.threads = 1;
    const Policy policy = train(problem, topt);
    result.rows[p].opex = policy.log.back().lower_bound;
    result.rows[p].total = result.rows[p].capex + result.rows[p].opex;
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(points)));
  if (workers == 1) {
    for (std::size_t p = 0; p < points; ++p) run(p);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t p = w; p < points; p += workers) run(p);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (std::size_t p = 0; p < points; ++p) {
    if (result.best < 0 || result.rows[p].total < result.rows[result.best].total) result.best = static_cast<int>(p);
  }
  return result;
}

EnumerationResult cmd_enumerate(const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  const LoadedSystem loaded = load_system(config);
  if (loaded.investment.size() == 0) throw InputError("config: enumeration needs investment candidates");
  const EnumerationResult result = enumerate_investments(loaded, config, config.enumeration_grid, config.training.threads);
  std::vector<std::string> head = result.candidates;
  head.insert(head.end(), {"capex", "opex", "total"});
  CsvWriter w(head);
  for (const EnumerationRow& r : result.rows) {
    std::vector<std::string> row;
    for (Eigen::Index k = 0; k < r.capacity.size(); ++k) row.push_back(format_number(r.capacity(k)));
    row.insert(row.end(), {format_number(r.capex), format_number(r.opex), format_number(r.total)});
    w.row(row);
  }
  write_atomic(options.out / "enumeration.csv", w.str());
  const EnumerationRow& best = result.rows[result.best];
  log << "best grid point:";
  for (std::size_t k = 0; k < result.candidates.size(); ++k) log << " " << result.candidates[k] << "=" << format_number(best.capacity(k));
  log << ", total " << format_number(best.total) << "\n";
  return result;
}

}  // namespace hydrosddp
