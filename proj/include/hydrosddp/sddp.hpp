#ifndef HYDROSDDP_SDDP_HPP
#define HYDROSDDP_SDDP_HPP

#include "hydrosddp/lp.hpp"
#include "hydrosddp/policy_graph.hpp"
#include "hydrosddp/stage.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydrosddp {

/// A policy graph together with the stage LPs its nodes reference. All
/// templates share one state vector layout.
struct Problem {
  PolicyGraph graph;
  std::vector<StageTemplate> templates;
  Eigen::VectorXd initial_state;
  /// State indices written by the investment node (empty without one).
  std::vector<int> investment_states;

  int num_states() const { return static_cast<int>(initial_state.size()); }
  const std::vector<std::string>& state_names() const { return templates.front().state_names; }
  void validate() const;
};

class InfeasibleSubproblem : public std::runtime_error {
 public:
  InfeasibleSubproblem(std::string node, Eigen::VectorXd state, Eigen::VectorXd noise);
  const std::string& node() const { return node_; }
  const Eigen::VectorXd& state() const { return state_; }
  const Eigen::VectorXd& noise() const { return noise_; }

 private:
  std::string node_;
  Eigen::VectorXd state_;
  Eigen::VectorXd noise_;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Cut {
  double intercept = 0.0;
  Eigen::VectorXd slope;
  int iteration = 0;

  double operator()(const Eigen::VectorXd& x) const { return intercept + slope.dot(x); }
};

/// Affine minorants theta >= intercept + slope'x of one node's cost-to-go.
class CutPool {
 public:
  explicit CutPool(int dimension = 0) : dim_(dimension) {}

  void add(double intercept, const Eigen::VectorXd& slope, int iteration);
  int size() const { return static_cast<int>(intercepts_.size()); }
  int dimension() const { return dim_; }
  Cut cut(int k) const;
  double value(int k, const Eigen::VectorXd& x) const;
  /// Index of the cut with the largest value at x; -1 when empty.
  int argmax(const Eigen::VectorXd& x, double* value = nullptr) const;

 private:
  int dim_;
  std::vector<double> intercepts_;
  std::vector<double> slopes_;  // row-major, dim_ entries per cut
  std::vector<int> iterations_;
};

struct TrainingRecord {
  int iteration = 0;
  double lower_bound = 0.0;
  double forward_cost = 0.0;
  double wall_time_s = 0.0;
};

struct Policy {
  std::vector<std::string> state_names;
  std::vector<CutPool> pools;  // one per graph node
  std::vector<TrainingRecord> log;
  int iterations = 0;

  static Policy empty(const Problem& problem);
  /// Throws TrainingError when state names or node count differ.
  void check_compatible(const Problem& problem) const;
  int total_cuts() const;
};

struct TrajectoryStep {
  int node = -1;
  int outcome = -1;  // index into the node's noise; -1 for an external payload
  Eigen::VectorXd payload;
  Eigen::VectorXd state_in;
  Eigen::VectorXd state_out;
  double stage_cost = 0.0;
  /// Product of edge probabilities from the root to this node.
  double weight = 1.0;
  /// Duals of the stage template's designated rows.
  Eigen::VectorXd duals;
  Eigen::VectorXd primal;  // empty unless requested
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;

  double total_cost() const;
  double discounted_cost() const;
};

struct StageResult {
  double objective = 0.0;
  double stage_cost = 0.0;
  double theta = 0.0;
  Eigen::VectorXd state_out;
  Eigen::VectorXd state_duals;
  Eigen::VectorXd duals;
  Eigen::VectorXd primal;
};

/// Solves node LPs against a policy's cut pools. Cuts are activated lazily:
/// the LP is re-solved with the most violated cut added until no cut in the
/// pool lies above the cost-to-go, which yields the optimum of the full LP.
///
/// Holds mutable scratch state, so each worker thread owns one.
class StageSolver {
 public:
  explicit StageSolver(const Problem& problem, lp::SolverOptions options = {});

  StageResult solve(const Policy& policy, int node, const Eigen::VectorXd& state_in,
                    const Eigen::VectorXd& payload, bool keep_primal = false);

  long long lp_solves() const { return lp_solves_; }

  /// Forgets the cached binding cuts. Degenerate LPs can return different
  /// optimal vertices depending on which cuts start active, so training
  /// resets before each pass to stay independent of the thread count.
  void reset();

 private:
  const Problem* problem_;
  lp::SolverOptions options_;
  std::vector<lp::LpModel> working_;
  std::vector<int> base_rows_;
  std::vector<std::vector<int>> active_;
  long long lp_solves_ = 0;
};

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) built from the top 53 bits.
double uniform01(Rng& rng);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// 20 cycles over the operating nodes, plus the investment node.
int default_max_depth(const Problem& problem, int cycles = 20);

Trajectory forward_pass(const Problem& problem, const Policy& policy, Rng& rng, int max_depth,
                        StageSolver& solver);

/// Adds one averaged cut per trajectory step, walking the steps in reverse.
void backward_pass(const Problem& problem, Policy& policy, const Trajectory& trajectory,
                   StageSolver& solver, int iteration);

/// Expected objective of the entry node(s) at the initial state.
double lower_bound(const Problem& problem, const Policy& policy, StageSolver& solver);
double lower_bound(const Problem& problem, const Policy& policy);

struct TrainingOptions {
  int iterations = 100;
  std::uint64_t seed = 0;
  int forward_passes = 1;
  int max_depth_cycles = 20;
  int threads = 1;
  lp::SolverOptions lp;
  /// Called after each iteration with the updated policy.
  std::function<void(const Policy&, const TrainingRecord&)> on_iteration;
};

Policy train(const Problem& problem, const TrainingOptions& options);
/// Continues training an existing policy.
void train(const Problem& problem, Policy& policy, const TrainingOptions& options);

enum class Estimator {
  Sampled,     // terminate by sampling the edge deficit
  Discounted,  // never terminate; weight stage costs by path probability
};

struct ScenarioSource {
  bool historical = false;
  /// Historical mode: one payload per visited non-investment node.
  std::vector<std::vector<Eigen::VectorXd>> sequences;

  static ScenarioSource in_sample() { return {}; }
  static ScenarioSource from_history(std::vector<std::vector<Eigen::VectorXd>> sequences) {
    return {true, std::move(sequences)};
  }
};

struct SimulationOptions {
  Estimator estimator = Estimator::Sampled;
  int max_depth = 0;  // 0: default_max_depth
  std::uint64_t seed = 0;
  bool keep_primal = false;
  int threads = 1;
  lp::SolverOptions lp;
};

std::vector<Trajectory> simulate(const Problem& problem, const Policy& policy,
                                 const ScenarioSource& source, int replications,
                                 const SimulationOptions& options = {});

/// Optimal investment-state values of the investment node under the current cuts.
Eigen::VectorXd first_stage_solution(const Problem& problem, const Policy& policy);

}  // namespace hydrosddp

#endif  // HYDROSDDP_SDDP_HPP
