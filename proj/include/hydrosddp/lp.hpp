#ifndef HYDROSDDP_LP_HPP
#define HYDROSDDP_LP_HPP

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hydrosddp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status status);

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A row references an undeclared variable, a value is NaN, or a name clashes.
class MalformedModel : public LpError {
 public:
  using LpError::LpError;
};

class UnknownConstraint : public LpError {
 public:
  using LpError::LpError;
};

/// The simplex did not converge (iteration limit, singular basis). Distinct
/// from a proven infeasible or unbounded model.
class NumericalFailure : public LpError {
 public:
  using LpError::LpError;
};

struct Term {
  int var;
  double coef;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
};

struct Constraint {
  std::string name;  // empty for anonymous rows (cuts)
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// A linear program  min c'x  s.t.  rows, bounds.
///
/// The model is a plain value: copy it to hand a private instance to a worker.
class LpModel {
 public:
  int add_variable(std::string name, double lower, double upper, double cost);

  /// Appends a constraint row. Throws MalformedModel when a term references
  /// an undeclared variable or carries a non-finite coefficient.
  int add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs);
  int add_row(std::string name, const std::vector<std::pair<std::string, double>>& terms,
              Sense sense, double rhs);

  void set_rhs(std::string_view name, double value);
  void set_rhs(int row, double value);
  void set_coefficient(int row, int var, double value);
  void set_bounds(int var, double lower, double upper);
  void set_cost(int var, double cost);

  /// Drops every row with index >= count. Used to discard temporary cut rows.
  void truncate_rows(int count);

  /// Marks a named constraint whose dual must be reported by solve().
  void designate_dual(std::string_view name);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(int j) const { return vars_.at(j); }
  const Constraint& row(int i) const { return rows_.at(i); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& rows() const { return rows_; }
  const std::vector<int>& designated() const { return designated_; }

  int variable_index(std::string_view name) const;
  int row_index(std::string_view name) const;
  /// -1 when absent.
  int find_variable(std::string_view name) const;
  int find_row(std::string_view name) const;

 private:
  void check_term(const Term& t) const;

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
  std::vector<int> designated_;
};

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-11;
  int refactor_frequency = 64;
  int max_iterations = 0;  // 0: 50 * (rows + cols) + 1000
};

struct LpSolution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd primal;
  /// Duals of every row, dual_i = d(optimal objective) / d(rhs_i).
  Eigen::VectorXd row_duals;
  /// (row index, dual) for each designated constraint, in designation order.
  std::vector<std::pair<int, double>> designated_duals;
  int iterations = 0;

  bool optimal() const { return status == Status::Optimal; }
  /// Dual of a designated constraint; throws UnknownConstraint otherwise.
  double dual(const LpModel& model, std::string_view name) const;
};

LpSolution solve(const LpModel& model, const SolverOptions& options = {});

}  // namespace hydrosddp::lp

#endif  // HYDROSDDP_LP_HPP
