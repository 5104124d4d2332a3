#ifndef HYDROSDDP_STAGE_HPP
#define HYDROSDDP_STAGE_HPP

#include "hydrosddp/lp.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hydrosddp {

/// rhs(row) = base rhs + coefficient * payload(payload_index)
struct NoiseTerm {
  int row = -1;
  int payload_index = 0;
  double coefficient = 1.0;
};

struct StateHandle {
  int in = -1;       // incoming-state variable
  int out = -1;      // outgoing-state variable
  int fix_row = -1;  // in == state value
};

/// Parameterised LP for one policy-graph node.
///
/// Incoming states enter through equality rows `state_fix[k]` whose rhs is
/// set per solve; their duals are the cut slopes. Outgoing states are plain
/// variables, and `theta_var` carries the cost-to-go that cuts bound below.
struct StageTemplate {
  std::string name;
  int week = -1;
  lp::LpModel model;
  std::vector<std::string> state_names;
  std::vector<int> state_fix_rows;
  std::vector<int> state_in_vars;
  std::vector<int> state_out_vars;
  int theta_var = -1;
  std::vector<NoiseTerm> noise_terms;

  int num_states() const { return static_cast<int>(state_fix_rows.size()); }

  /// Adds an incoming/outgoing pair and the fixing row for a new state.
  StateHandle add_state(const std::string& state, double lower, double upper);

  /// Adds the cost-to-go variable (lower bound 0, unit cost).
  int add_cost_to_go();

  /// Writes state and noise right-hand sides into `working`, a copy of `model`.
  void instantiate(lp::LpModel& working, const Eigen::VectorXd& state_in,
                   const Eigen::VectorXd& payload) const;
};

}  // namespace hydrosddp

#endif  // HYDROSDDP_STAGE_HPP
