#ifndef HYDROSDDP_LOADER_HPP
#define HYDROSDDP_LOADER_HPP

#include "hydrosddp/config.hpp"
#include "hydrosddp/hydrothermal.hpp"
#include "hydrosddp/wind.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hydrosddp {

struct LoadedSystem {
  SystemData system;
  InvestmentSpec investment;
  /// [week] hours x nodes, MW.
  std::vector<Eigen::MatrixXd> hourly_demand;
  std::optional<WindTraces> traces;
  std::vector<std::string> wind_nodes;  // network node of each wind region

  /// [week] total demand per observation (hours repeated for every wind year).
  std::vector<Eigen::VectorXd> total_demand() const;
};

/// Reads every data file named by the config, builds load blocks at the
/// nominal wind capacity, fits wind slopes per wind candidate and validates
/// the result. Throws InputError or the module's validation error.
LoadedSystem load_system(const RunConfig& config);

/// Slope table for national wind with the configured shares.
WindSlopeTable national_wind_slopes(const LoadedSystem& loaded, const RunConfig& config);

/// Writes the tabular inputs of `loaded` in the formats load_system reads,
/// returning a config that points at them.
RunConfig write_system(const LoadedSystem& loaded, const RunConfig& config, const std::filesystem::path& dir);

}  // namespace hydrosddp

#endif  // HYDROSDDP_LOADER_HPP
