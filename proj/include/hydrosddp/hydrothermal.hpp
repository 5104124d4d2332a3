#ifndef HYDROSDDP_HYDROTHERMAL_HPP
#define HYDROSDDP_HYDROTHERMAL_HPP

#include "hydrosddp/investment.hpp"
#include "hydrosddp/sddp.hpp"
#include "hydrosddp/stage.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydrosddp {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kHoursPerWeek = 168.0;
/// Storage is carried in the LP in units of 10^6 m^3.
inline constexpr double kStorageScale = 1e6;

class SystemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Reservoir {
  std::string name;
  double capacity = 0.0;  // m^3
  double initial = 0.0;   // m^3
  double minimum = 0.0;   // consented minimum, m^3; may be breached at a penalty
};

/// A hydro station. Released and spilled water leaves `from` and enters `to`;
/// either may be empty (river source / sea). Pumps have a negative specific
/// power, draw from the lower reservoir and deliver to the upper one.
struct HydroPlant {
  std::string name;
  std::string node;
  double specific_power = 0.0;  // gamma, MW per m^3/s
  double flow_capacity = 0.0;   // b, m^3/s
  double spill_capacity = 0.0;  // c, m^3/s
  std::string from;
  std::string to;
  double min_flow = 0.0;  // m^3/s through release plus spill

  bool is_pump() const { return specific_power < 0.0; }
};

struct Peaker {
  std::string name;
  std::string node;
  double capacity = 0.0;  // MW
  double cost = 0.0;      // $/MWh
};

/// Lossless transport link with symmetric limit.
struct Line {
  std::string name;
  std::string from;
  std::string to;
  double capacity = 0.0;  // MW
};

/// Sheddable slice of every node's load: up to fraction * D at cost[b] $/MWh.
struct LoadTranche {
  std::string name;
  double fraction = 1.0;
  Eigen::VectorXd cost;  // per block, or one entry for all blocks
};

struct PumpPair {
  std::string pump;
  std::string generator;
};

struct WeekBlocks {
  std::vector<double> hours;  // T(b, t)
  Eigen::MatrixXd demand;     // nodes x blocks, MW
};

/// Output of one wind region attributed to one investment candidate:
/// w(b, t) <= mu[t](b) * capacity.
struct WindLink {
  std::string candidate;
  std::string region;
  std::string node;
  std::vector<Eigen::VectorXd> mu;  // [week] per block
};

struct SystemData {
  std::vector<std::string> nodes;
  std::vector<Reservoir> reservoirs;
  std::vector<HydroPlant> hydro;
  std::vector<Peaker> peakers;
  std::vector<Line> lines;
  Eigen::VectorXd fixed_generation;  // per node, MW; curtailable at no cost
  std::vector<LoadTranche> tranches;
  std::vector<PumpPair> pump_pairs;
  std::vector<WeekBlocks> weeks;
  /// [year][week] inflow per reservoir, m^3/s.
  std::vector<std::vector<Eigen::VectorXd>> inflows;
  double annual_discount = 0.9;
  /// $ per m^3 below a reservoir's minimum; defaults to default_storage_penalty().
  std::optional<double> storage_penalty;
  std::vector<WindLink> wind;

  int num_weeks() const { return static_cast<int>(weeks.size()); }
  int num_blocks(int week) const { return static_cast<int>(weeks.at(week).hours.size()); }
  int node_index(const std::string& name) const;
  int reservoir_index(const std::string& name) const;
  int hydro_index(const std::string& name) const;
  int peaker_index(const std::string& name) const;
  int line_index(const std::string& name) const;

  /// Throws SystemError naming the violated invariant.
  void validate() const;

  /// River-chain incidence A (reservoirs x hydro plants): +1 where a plant
  /// draws water from the reservoir, -1 where it delivers into it.
  Eigen::MatrixXd incidence() const;

  /// Twice the shedding value of the energy one m^3 yields through every plant.
  double default_storage_penalty() const;
  double penalty() const { return storage_penalty.value_or(default_storage_penalty()); }
};

std::string storage_state(const std::string& reservoir);

/// Weekly LP of the hydro-thermal model without pumps or investments. States
/// are the reservoir storages (10^6 m^3); the noise payload is the inflow per
/// reservoir in m^3/s.
StageTemplate build_stage(const SystemData& system, int week);

/// Adds the pump of `pair` to a stage built by build_stage and returns the
/// round-trip efficiency |gamma_gen / gamma_pump|.
double apply_pumping(StageTemplate& stage, const SystemData& system, const PumpPair& pair);

/// Adds one pass-through capacity state per candidate and ties the targeted
/// peaker, line or wind output to it.
void apply_investment_links(StageTemplate& stage, const SystemData& system, const InvestmentSpec& spec);

/// Round-trip efficiency of a pump pair after validating it.
double round_trip_efficiency(const SystemData& system, const PumpPair& pair);

struct ProblemOptions {
  /// Weeks per year for rho = beta^(1 / stages_per_year); 0 means the cycle length.
  int stages_per_year = 0;
  /// Endogenous investment root. When false, capacities start at `fixed_capacity`.
  bool investment_root = true;
  Eigen::VectorXd fixed_capacity;
};

/// Cyclic policy graph over the system's weeks, stagewise-independent
/// inflow noise (one equiprobable outcome per inflow year), pumps applied,
/// and optionally an investment root.
Problem build_cyclic_problem(const SystemData& system, const InvestmentSpec& spec,
                             const ProblemOptions& options = {});

/// One payload sequence per inflow year covering `cycles` passes of the weeks.
std::vector<std::vector<Eigen::VectorXd>> historical_sequences(const SystemData& system, int cycles = 1);

/// Physical quantities of one solved stage, decoded from its primal vector.
struct StageOutcome {
  Eigen::VectorXd storage;      // m^3 at the end of the week
  Eigen::VectorXd water_value;  // $/m^3, minus the water-balance dual
  double shedding_mwh = 0.0;
  Eigen::VectorXd line_flow;    // hour-weighted mean MW per line
  Eigen::MatrixXd release;      // plants x blocks, m^3/s (pumps included)
  Eigen::MatrixXd spill;        // plants x blocks, m^3/s
  Eigen::VectorXd below_minimum;  // m^3
};

StageOutcome decode_stage(const SystemData& system, const StageTemplate& stage,
                          const Eigen::VectorXd& primal, const Eigen::VectorXd& duals,
                          const Eigen::VectorXd& state_out);

/// Largest |lhs - rhs| over rows whose name starts with `prefix`, for a model
/// instantiated at the given state and payload.
double max_row_residual(const StageTemplate& stage, const Eigen::VectorXd& state_in,
                        const Eigen::VectorXd& payload, const Eigen::VectorXd& primal,
                        const std::string& prefix);

}  // namespace hydrosddp

#endif  // HYDROSDDP_HYDROTHERMAL_HPP
