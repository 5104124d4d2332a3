#ifndef HYDROSDDP_WIND_HPP
#define HYDROSDDP_WIND_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace hydrosddp {

class WindError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Capacity factors per week as an (observations x regions) matrix. With Y
/// wind years the observation index is y * hours + h.
struct WindTraces {
  std::vector<std::string> regions;
  Eigen::VectorXd shares;  // alpha_r, summing to one
  std::vector<Eigen::MatrixXd> factors;
  int years = 1;

  static constexpr double kOvershoot = 0.05;

  int num_weeks() const { return static_cast<int>(factors.size()); }
  /// Throws WindError on bad shares, shapes or factors outside [0, 1 + 0.05].
  void validate() const;
  /// Count of factors in (1, 1 + 0.05], tolerated as data noise.
  int overshoot_count() const;
};

/// D_r - lambda_r * alpha_r * K, column by column (regions).
Eigen::MatrixXd net_demand(const Eigen::MatrixXd& demand, const Eigen::MatrixXd& factors,
                           const Eigen::VectorXd& shares, double capacity);

/// Total demand minus national wind output K * sum_r alpha_r lambda_r.
Eigen::VectorXd system_net_demand(const Eigen::VectorXd& demand, const Eigen::MatrixXd& factors,
                                  const Eigen::VectorXd& shares, double capacity);

struct BlockAssignment {
  std::vector<int> block_of;  // per observation
  std::vector<int> order;     // observations sorted by descending net demand
  Eigen::VectorXd levels;     // mean net demand per block
};

/// Sorts descending (ties by observation index) and fills block b with the
/// next counts[b] observations.
BlockAssignment build_blocks(const Eigen::VectorXd& series, const std::vector<int>& counts);

struct WindFitOptions {
  std::vector<double> grid{1000.0, 2000.0, 3000.0, 4000.0, 5000.0};  // MW
  double nominal = 2500.0;                                            // K-bar, MW
  std::vector<int> block_hours;                                       // T(b), sums to hours per week
};

struct WindSlopeTable {
  std::vector<std::string> regions;
  std::vector<int> block_hours;
  double nominal = 0.0;
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> mu;        // [week] regions x blocks, clamped at 0
  std::vector<Eigen::MatrixXd> raw_mu;    // [week] before clamping
  std::vector<Eigen::MatrixXd> residual;  // [week] residual norm of each fit
  std::vector<BlockAssignment> nominal_blocks;  // [week] b(K-bar)

  int num_weeks() const { return static_cast<int>(mu.size()); }
  int num_blocks() const { return static_cast<int>(block_hours.size()); }
  int clamped_count() const;
};

/// Least-squares slope and residual norm of y against x.
std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Mean output alpha_r K sum_{h in b(K)} lambda_r / |b| per region and block,
/// with blocks re-sorted at capacity K.
Eigen::MatrixXd block_wind_output(const Eigen::VectorXd& demand, const Eigen::MatrixXd& factors,
                                  const Eigen::VectorXd& shares, double capacity,
                                  const std::vector<int>& counts);

/// `demand[t]` is the total hourly demand of week t (observations as in traces).
WindSlopeTable fit_slopes(const std::vector<Eigen::VectorXd>& demand, const WindTraces& traces,
                          const WindFitOptions& options);

struct BlockShapeReport {
  std::vector<double> grid;
  Eigen::VectorXd first;  // aggregate net demand of block 1 per K
  Eigen::VectorXd last;   // aggregate net demand of block B per K
  bool first_nonincreasing = true;
  bool first_convex = true;
  bool last_nonincreasing = true;
  bool last_concave = true;
  double min_first_curvature = 0.0;  // smallest change of consecutive slopes
  double max_last_curvature = 0.0;

  bool ok() const { return first_nonincreasing && first_convex && last_nonincreasing && last_concave; }
};

/// Exact block aggregates over a fine grid, re-sorting at every K.
BlockShapeReport block_shape_check(const Eigen::VectorXd& demand, const Eigen::MatrixXd& factors,
                                   const Eigen::VectorXd& shares, const std::vector<double>& grid,
                                   const std::vector<int>& counts, double tolerance = 1e-9);

/// Counts scaled by the number of wind years.
std::vector<int> observation_counts(const std::vector<int>& block_hours, int years);

}  // namespace hydrosddp

#endif  // HYDROSDDP_WIND_HPP
