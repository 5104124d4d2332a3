#include "hydrosddp/stage.hpp"

#include <stdexcept>

namespace hydrosddp {

StateHandle StageTemplate::add_state(const std::string& state, double lower, double upper) {
  StateHandle h;
  h.in = model.add_variable(state + ".in", -lp::kInf, lp::kInf, 0.0);
  h.out = model.add_variable(state, lower, upper, 0.0);
  h.fix_row = model.add_row("state_fix[" + state + "]", {{h.in, 1.0}}, lp::Sense::Equal, 0.0);
  state_names.push_back(state);
  state_fix_rows.push_back(h.fix_row);
  state_in_vars.push_back(h.in);
  state_out_vars.push_back(h.out);
  return h;
}

int StageTemplate::add_cost_to_go() {
  theta_var = model.add_variable("cost_to_go", 0.0, lp::kInf, 1.0);
  return theta_var;
}

void StageTemplate::instantiate(lp::LpModel& working, const Eigen::VectorXd& state_in,
                                const Eigen::VectorXd& payload) const {
  if (state_in.size() != num_states()) {
    throw std::invalid_argument("stage '" + name + "': state dimension mismatch");
  }
  for (int k = 0; k < num_states(); ++k) working.set_rhs(state_fix_rows[k], state_in(k));
  for (const NoiseTerm& term : noise_terms) {
    if (term.payload_index >= payload.size()) {
      throw std::invalid_argument("stage '" + name + "': noise payload too short");
    }
    working.set_rhs(term.row, model.row(term.row).rhs);
  }
  for (const NoiseTerm& term : noise_terms) {
    const double current = working.row(term.row).rhs;
    working.set_rhs(term.row, current + term.coefficient * payload(term.payload_index));
  }
}

}  // namespace hydrosddp
