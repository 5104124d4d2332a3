#ifndef HYDROSDDP_REPORT_HPP
#define HYDROSDDP_REPORT_HPP

#include "hydrosddp/hydrothermal.hpp"
#include "hydrosddp/sddp.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hydrosddp {

/// Versioned JSON with state names and node names embedded.
/// `zero_time` writes wall times as 0 so repeated runs give identical files.
std::string policy_to_json(const Problem& problem, const Policy& policy, bool zero_time = false);
/// Throws TrainingError when the file does not match `problem`.
Policy policy_from_json(const std::string& text, const Problem& problem);
void save_policy(const std::filesystem::path& path, const Problem& problem, const Policy& policy,
                 bool zero_time = false);
Policy load_policy(const std::filesystem::path& path, const Problem& problem);

/// training_log.csv body. `zero_time` writes wall_time_s as 0 for byte-stable logs.
std::string training_log_csv(const Policy& policy, bool zero_time = false);

struct DurationPoint {
  double value = 0.0;
  double exceedance = 0.0;  // fraction of weight at or above `value`
};

/// Sorted descending; equal weights when `weights` is empty.
std::vector<DurationPoint> duration_curve(const std::vector<double>& series, const std::vector<double>& weights = {});

/// Linear-interpolation percentile (q in [0, 100]) of unsorted data.
double percentile(std::vector<double> data, double q);

struct PercentileBand {
  std::string quantity;
  int step = 0;
  int count = 0;
  double p10 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p90 = 0.0;
};

struct StageRecord {
  int replication = 0;
  int step = 0;
  int node = -1;
  int week = -1;  // -1 for the investment node
  double stage_cost = 0.0;
  double weight = 1.0;
  StageOutcome outcome;
};

struct SimulationReport {
  std::vector<std::string> reservoirs;
  std::vector<std::string> lines;
  std::vector<StageRecord> records;
  std::vector<PercentileBand> bands;
  std::vector<double> total_cost;       // per replication, undiscounted
  std::vector<double> discounted_cost;  // per replication

  double mean_cost() const;
  double mean_discounted_cost() const;
  double discounted_standard_error() const;
};

SimulationReport build_report(const SystemData& system, const Problem& problem,
                              const std::vector<Trajectory>& trajectories);
/// Writes simulation_stages.csv, simulation_bands.csv, simulation_summary.csv
/// and shedding_duration.csv under `dir`.
void write_report(const SimulationReport& report, const std::filesystem::path& dir);

}  // namespace hydrosddp

#endif  // HYDROSDDP_REPORT_HPP
