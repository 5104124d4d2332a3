#ifndef HYDROSDDP_COMMANDS_HPP
#define HYDROSDDP_COMMANDS_HPP

#include "hydrosddp/config.hpp"
#include "hydrosddp/loader.hpp"
#include "hydrosddp/report.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hydrosddp {

/// Command-line overrides on top of the config file.
struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<int> threads;
  std::optional<int> eval_cadence;
  std::filesystem::path out = ".";
  std::filesystem::path policy;  // defaults to <out>/policy.json
  bool reproducible = false;     // zero wall times in the training log
};

RunConfig apply_overrides(RunConfig config, const CommandOptions& options);

/// Problem for the configured system: investment root when candidates exist.
Problem build_problem(const LoadedSystem& loaded, const RunConfig& config);

TrainingOptions training_options(const RunConfig& config, int max_depth_cycles_override = 0);

/// wind_slopes.csv; returns the number of clamped slopes.
int cmd_linearize_wind(const RunConfig& config, const CommandOptions& options, std::ostream& log);

/// policy.json, training_log.csv and investments.csv under options.out.
Policy cmd_train(const RunConfig& config, const CommandOptions& options, std::ostream& log);

SimulationReport cmd_simulate(const RunConfig& config, const CommandOptions& options, std::ostream& log);

double cmd_bound(const RunConfig& config, const CommandOptions& options, std::ostream& log);

struct EnumerationRow {
  Eigen::VectorXd capacity;
  double capex = 0.0;
  double opex = 0.0;
  double total = 0.0;
};

struct EnumerationResult {
  std::vector<std::string> candidates;
  std::vector<EnumerationRow> rows;
  int best = -1;
};

/// Trains the plain cyclic model at every point of the grid's Cartesian
/// product with the same options and seed. Candidates missing from `grid`
/// are held at 0.
EnumerationResult enumerate_investments(const LoadedSystem& loaded, const RunConfig& config,
                                        const std::map<std::string, std::vector<double>>& grid, int threads = 1);

EnumerationResult cmd_enumerate(const RunConfig& config, const CommandOptions& options, std::ostream& log);

}  // namespace hydrosddp

#endif  // HYDROSDDP_COMMANDS_HPP
