#include "hydrosddp/investment.hpp"

#include "hydrosddp/sddp.hpp"

#include <algorithm>
#include <set>

namespace hydrosddp {

const char* to_string(InvestmentKind kind) {
  switch (kind) {
    case InvestmentKind::Wind: return "wind";
    case InvestmentKind::Peaker: return "peaker";
    case InvestmentKind::Line: return "line";
  }
  return "?";
}

InvestmentKind parse_investment_kind(const std::string& text) {
  if (text == "wind" || text == "wind-national") return InvestmentKind::Wind;
  if (text == "peaker") return InvestmentKind::Peaker;
  if (text == "line" || text == "transmission-line") return InvestmentKind::Line;
  throw InvestmentError("unknown investment kind '" + text + "'");
}

void InvestmentSpec::validate() const {
  if (!(annual_discount > 0.0 && annual_discount < 1.0)) {
    throw InvestmentError("annual discount must lie in (0, 1)");
  }
  std::set<std::string> names;
  for (const InvestmentCandidate& c : candidates) {
    if (c.name.empty()) throw InvestmentError("investment candidate without a name");
    if (!names.insert(c.name).second) throw InvestmentError("duplicate investment candidate '" + c.name + "'");
    if (!(c.overnight_cost >= 0.0) || std::isinf(c.overnight_cost)) {
      throw InvestmentError("candidate '" + c.name + "': overnight cost must be finite and non-negative");
    }
    if (c.lifetime) {
      const double tau = *c.lifetime;
      if (!(tau >= 1.0) || (std::isfinite(tau) && tau != std::floor(tau))) {
        throw InvestmentError("candidate '" + c.name + "': lifetime must be an integer >= 1 or infinite");
      }
    }
    if (c.upper_bound && !(*c.upper_bound >= 0.0)) {
      throw InvestmentError("candidate '" + c.name + "': upper bound must be non-negative");
    }
    if (c.kind != InvestmentKind::Wind && c.target.empty()) {
      throw InvestmentError("candidate '" + c.name + "' needs a target");
    }
  }
}

Eigen::VectorXd InvestmentSpec::unit_costs() const {
  Eigen::VectorXd c(size());
  for (int k = 0; k < size(); ++k) {
    const InvestmentCandidate& cand = candidates[k];
    const double tau = cand.lifetime.value_or(std::numeric_limits<double>::infinity());
    c(k) = reinvestment_cost(cand.overnight_cost, annual_discount, tau);
  }
  return c;
}

void LcoeAssumptions::validate() const {
  if (!(lcoe >= 0.0)) throw InvestmentError("LCOE must be non-negative");
  if (!(hours_per_year > 0.0)) throw InvestmentError("hours per year must be positive");
  if (!(capacity_factor > 0.0 && capacity_factor <= 1.0)) {
    throw InvestmentError("capacity factor must lie in (0, 1]");
  }
  if (!(lifetime >= 1.0)) throw InvestmentError("lifetime must be at least one year");
  if (!(discount > 0.0 && discount < 1.0)) throw InvestmentError("discount must lie in (0, 1)");
}

double lcoe_to_overnight(const LcoeAssumptions& a) {
  a.validate();
  return lcoe_to_overnight(a.lcoe, a.hours_per_year, a.capacity_factor, a.lifetime, a.discount);
}

double composed_round_trip(const LcoeAssumptions& a) {
  return reinvestment_cost(lcoe_to_overnight(a), a.discount, a.lifetime);
}

std::string capacity_state(const std::string& candidate) { return "capacity[" + candidate + "]"; }

StageTemplate build_investment_node(const InvestmentSpec& spec,
                                    const std::vector<std::string>& state_names,
                                    const Eigen::VectorXd& passthrough_lower,
                                    const Eigen::VectorXd& passthrough_upper) {
  spec.validate();
  const Eigen::VectorXd cost = spec.unit_costs();
  StageTemplate t;
  t.name = "investment";

  std::vector<int> candidate_of(state_names.size(), -1);
  for (int k = 0; k < spec.size(); ++k) {
    const auto it = std::find(state_names.begin(), state_names.end(), capacity_state(spec.candidates[k].name));
    if (it == state_names.end()) {
      throw InvestmentError("candidate '" + spec.candidates[k].name + "' has no capacity state");
    }
    candidate_of[it - state_names.begin()] = k;
  }

  for (std::size_t d = 0; d < state_names.size(); ++d) {
    const int k = candidate_of[d];
    if (k >= 0) {
      const InvestmentCandidate& c = spec.candidates[k];
      // u_k is the outgoing capacity itself.
      const StateHandle h = t.add_state(state_names[d], 0.0, c.upper_bound.value_or(lp::kInf));
      t.model.set_cost(h.out, cost(k));
    } else {
      const StateHandle h = t.add_state(state_names[d], passthrough_lower(d), passthrough_upper(d));
      t.model.add_row("carry[" + state_names[d] + "]", {{h.out, 1.0}, {h.in, -1.0}}, lp::Sense::Equal, 0.0);
    }
  }
  t.add_cost_to_go();
  return t;
}

Problem add_investment_root(Problem operating, const InvestmentSpec& spec) {
  if (operating.templates.empty()) throw InvestmentError("operating problem has no stage templates");
  const StageTemplate& first = operating.templates.front();
  const int n = first.num_states();
  Eigen::VectorXd lower(n), upper(n);
  for (int d = 0; d < n; ++d) {
    const lp::Variable& v = first.model.variable(first.state_out_vars[d]);
    lower(d) = v.lower;
    upper(d) = v.upper;
  }
  StageTemplate node = build_investment_node(spec, first.state_names, lower, upper);
  const int template_index = static_cast<int>(operating.templates.size());
  operating.templates.push_back(std::move(node));
  operating.graph = with_investment_root(operating.graph, spec, template_index);
  operating.investment_states.clear();
  for (const InvestmentCandidate& c : spec.candidates) {
    const auto& names = operating.templates.front().state_names;
    operating.investment_states.push_back(
        static_cast<int>(std::find(names.begin(), names.end(), capacity_state(c.name)) - names.begin()));
  }
  return operating;
}

}  // namespace hydrosddp
