#ifndef HYDROSDDP_INVESTMENT_HPP
#define HYDROSDDP_INVESTMENT_HPP

#include "hydrosddp/stage.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydrosddp {

struct Problem;

class InvestmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class InvestmentKind { Wind, Peaker, Line };

const char* to_string(InvestmentKind kind);
InvestmentKind parse_investment_kind(const std::string& text);

struct InvestmentCandidate {
  std::string name;
  InvestmentKind kind = InvestmentKind::Peaker;
  /// Peaker or line name. Unused for wind.
  std::string target;
  /// Wind only: wind regions served by this candidate; empty means all.
  std::vector<std::string> regions;
  double overnight_cost = 0.0;  // I, per MW
  std::optional<double> lifetime;     // years; absent means never replaced
  std::optional<double> upper_bound;  // MW
};

struct InvestmentSpec {
  std::vector<InvestmentCandidate> candidates;
  double annual_discount = 0.9;

  /// Throws InvestmentError on a duplicate name, I < 0, a bad lifetime or beta.
  void validate() const;
  /// c_inv per candidate.
  Eigen::VectorXd unit_costs() const;
  int size() const { return static_cast<int>(candidates.size()); }
};

struct LcoeAssumptions {
  double lcoe = 0.0;  // per MWh
  double hours_per_year = 8760.0;
  double capacity_factor = 1.0;
  double lifetime = std::numeric_limits<double>::infinity();
  double discount = 0.9;

  void validate() const;
};

/// c_inv = I / (1 - beta^tau), the present cost of buying at t = 0 and again
/// every tau years. tau = +inf gives I.
template <typename Scalar>
Scalar reinvestment_cost(Scalar overnight, Scalar beta, Scalar tau) {
  if (!(beta > Scalar(0) && beta < Scalar(1))) throw InvestmentError("annual discount must lie in (0, 1)");
  if (!(tau >= Scalar(1))) throw InvestmentError("lifetime must be at least one year");
  if (std::isinf(static_cast<double>(tau))) return overnight;
  return overnight / (Scalar(1) - std::pow(beta, tau));
}

/// I = LCOE * H * eta * (1 - beta^tau) / (1 - beta).
template <typename Scalar>
Scalar lcoe_to_overnight(Scalar lcoe, Scalar hours, Scalar eta, Scalar tau, Scalar beta) {
  const Scalar annuity = std::isinf(static_cast<double>(tau)) ? Scalar(1) / (Scalar(1) - beta)
                                                               : (Scalar(1) - std::pow(beta, tau)) / (Scalar(1) - beta);
  return lcoe * hours * eta * annuity;
}

double lcoe_to_overnight(const LcoeAssumptions& a);

/// reinvestment_cost(lcoe_to_overnight(a), beta, tau); tau cancels, leaving
/// LCOE * H * eta / (1 - beta).
double composed_round_trip(const LcoeAssumptions& a);

/// State name carrying the installed capacity of a candidate.
std::string capacity_state(const std::string& candidate);

/// SP_inv: min sum c_k u_k + theta, u >= 0 (<= upper bound), x_inv = u.
/// States not named after a candidate pass straight through, so the node can
/// sit in front of operating stages sharing `state_names`.
StageTemplate build_investment_node(const InvestmentSpec& spec,
                                    const std::vector<std::string>& state_names,
                                    const Eigen::VectorXd& passthrough_lower,
                                    const Eigen::VectorXd& passthrough_upper);

/// Returns `operating` with an investment root in front of its entry node.
/// Every candidate must already exist as a capacity state of the operating
/// templates (see apply_investment_links).
Problem add_investment_root(Problem operating, const InvestmentSpec& spec);

}  // namespace hydrosddp

#endif  // HYDROSDDP_INVESTMENT_HPP
