#ifndef HYDROSDDP_CONFIG_HPP
#define HYDROSDDP_CONFIG_HPP

#include "hydrosddp/hydrothermal.hpp"
#include "hydrosddp/investment.hpp"
#include "hydrosddp/sddp.hpp"
#include "hydrosddp/wind.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hydrosddp {

struct DataFiles {
  std::filesystem::path reservoirs;
  std::filesystem::path hydro;
  std::filesystem::path peakers;
  std::filesystem::path lines;
  std::filesystem::path fixed_generation;
  std::filesystem::path demand;
  std::filesystem::path inflows;
  std::filesystem::path wind;
  std::filesystem::path shares;
};

struct TrainingConfig {
  int iterations = 100;
  std::uint64_t seed = 0;
  int eval_cadence = 10;
  int max_depth_cycles = 20;
  int threads = 1;
  int forward_passes = 1;
};

struct SimulationConfig {
  bool historical = true;
  int replications = 100;  // in-sample only
  int cycles = 1;          // historical only
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::Sampled;
};

/// Parsed run configuration. Relative paths resolve against the config file.
struct RunConfig {
  std::filesystem::path source;
  DataFiles files;
  std::vector<std::string> nodes;
  double annual_discount = 0.9;
  int stages_per_year = 0;
  std::vector<int> block_hours;
  std::vector<LoadTranche> tranches;
  std::vector<PumpPair> pump_pairs;
  std::optional<double> storage_penalty;
  WindFitOptions wind;
  InvestmentSpec investment;
  /// Candidate name -> capacity levels for the enumeration command.
  std::map<std::string, std::vector<double>> enumeration_grid;
  TrainingConfig training;
  SimulationConfig simulation;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

}  // namespace hydrosddp

#endif  // HYDROSDDP_CONFIG_HPP
