#include "hydrosddp/lp.hpp"

#include "hydrosddp/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace hydrosddp::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal:
      return "optimal";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
  }
  return "?";
}

int LpModel::add_variable(std::string name, double lower, double upper, double cost) {
  if (std::isnan(lower) || std::isnan(upper) || !std::isfinite(cost) || lower == kInf ||
      upper == -kInf) {
    throw MalformedModel("variable '" + name + "' has invalid bounds or cost");
  }
  const int index = num_variables();
  if (!name.empty()) {
    if (!var_index_.emplace(name, index).second) {
      throw MalformedModel("duplicate variable name '" + name + "'");
    }
  }
  vars_.push_back({std::move(name), lower, upper, cost});
  return index;
}

void LpModel::check_term(const Term& t) const {
  if (t.var < 0 || t.var >= num_variables()) {
    throw MalformedModel("row references undeclared variable index " + std::to_string(t.var));
  }
  if (!std::isfinite(t.coef)) throw MalformedModel("non-finite row coefficient");
}

int LpModel::add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  for (const Term& t : terms) check_term(t);
  if (!std::isfinite(rhs)) throw MalformedModel("row '" + name + "' has a non-finite rhs");
  const int index = num_rows();
  if (!name.empty()) {
    if (!row_index_.emplace(name, index).second) {
      throw MalformedModel("duplicate constraint name '" + name + "'");
    }
  }
  rows_.push_back({std::move(name), std::move(terms), sense, rhs});
  return index;
}

int LpModel::add_row(std::string name, const std::vector<std::pair<std::string, double>>& terms,
                     Sense sense, double rhs) {
  std::vector<Term> resolved;
  resolved.reserve(terms.size());
  for (const auto& [var, coef] : terms) {
    const int j = find_variable(var);
    if (j < 0) throw MalformedModel("row '" + name + "' references undeclared variable '" + var + "'");
    resolved.push_back({j, coef});
  }
  return add_row(std::move(name), std::move(resolved), sense, rhs);
}

void LpModel::set_rhs(std::string_view name, double value) { set_rhs(row_index(name), value); }

void LpModel::set_rhs(int row, double value) {
  if (row < 0 || row >= num_rows()) throw UnknownConstraint("row index out of range");
  if (!std::isfinite(value)) throw MalformedModel("non-finite rhs");
  rows_[row].rhs = value;
}

void LpModel::set_coefficient(int row, int var, double value) {
  if (row < 0 || row >= num_rows()) throw UnknownConstraint("row index out of range");
  check_term({var, value});
  for (Term& t : rows_[row].terms) {
    if (t.var == var) {
      t.coef = value;
      return;
    }
  }
  rows_[row].terms.push_back({var, value});
}

void LpModel::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= num_variables()) throw MalformedModel("variable index out of range");
  if (std::isnan(lower) || std::isnan(upper) || lower == kInf || upper == -kInf) {
    throw MalformedModel("invalid bounds");
  }
  vars_[var].lower = lower;
  vars_[var].upper = upper;
}

void LpModel::set_cost(int var, double cost) {
  if (var < 0 || var >= num_variables()) throw MalformedModel("variable index out of range");
  if (!std::isfinite(cost)) throw MalformedModel("non-finite cost");
  vars_[var].cost = cost;
}

void LpModel::truncate_rows(int count) {
  if (count >= num_rows()) return;
  for (int i = count; i < num_rows(); ++i) {
    if (!rows_[i].name.empty()) row_index_.erase(rows_[i].name);
  }
  rows_.resize(count);
  std::erase_if(designated_, [count](int r) { return r >= count; });
}

void LpModel::designate_dual(std::string_view name) {
  const int r = row_index(name);
  if (std::find(designated_.begin(), designated_.end(), r) == designated_.end()) {
    designated_.push_back(r);
  }
}

int LpModel::find_variable(std::string_view name) const {
  const auto it = var_index_.find(std::string(name));
  return it == var_index_.end() ? -1 : it->second;
}

int LpModel::find_row(std::string_view name) const {
  const auto it = row_index_.find(std::string(name));
  return it == row_index_.end() ? -1 : it->second;
}

int LpModel::variable_index(std::string_view name) const {
  const int j = find_variable(name);
  if (j < 0) throw MalformedModel("unknown variable '" + std::string(name) + "'");
  return j;
}

int LpModel::row_index(std::string_view name) const {
  const int r = find_row(name);
  if (r < 0) throw UnknownConstraint("unknown constraint '" + std::string(name) + "'");
  return r;
}

double LpSolution::dual(const LpModel& model, std::string_view name) const {
  const int r = model.row_index(name);
  for (const auto& [row, value] : designated_duals) {
    if (row == r) return value;
  }
  throw UnknownConstraint("constraint '" + std::string(name) + "' is not designated for duals");
}

LpSolution solve(const LpModel& model, const SolverOptions& options) {
  const int m = model.num_rows();
  const int n = model.num_variables();

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
  Eigen::VectorXd b(m);
  std::vector<Sense> sense(m);
  for (int i = 0; i < m; ++i) {
    const Constraint& row = model.row(i);
    for (const Term& t : row.terms) {
      if (t.var < 0 || t.var >= n) throw MalformedModel("row references undeclared variable");
      A(i, t.var) += t.coef;
    }
    b(i) = row.rhs;
    sense[i] = row.sense;
  }
  Eigen::VectorXd c(n), lower(n), upper(n);
  for (int j = 0; j < n; ++j) {
    const Variable& v = model.variable(j);
    c(j) = v.cost;
    lower(j) = v.lower;
    upper(j) = v.upper;
  }

  // Geometric scaling by powers of two, so scaling itself is exact.
  Eigen::VectorXd rs = Eigen::VectorXd::Ones(m), cs = Eigen::VectorXd::Ones(n);
  auto pow2 = [](double v) { return std::exp2(std::round(std::log2(v))); };
  for (int pass = 0; pass < 4; ++pass) {
    for (int i = 0; i < m; ++i) {
      double lo = kInf, hi = 0.0;
      for (int j = 0; j < n; ++j) {
        const double a = std::abs(A(i, j)) * cs(j);
        if (a == 0.0) continue;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      if (hi > 0.0) rs(i) = pow2(1.0 / std::sqrt(lo * hi));
    }
    for (int j = 0; j < n; ++j) {
      double lo = kInf, hi = 0.0;
      for (int i = 0; i < m; ++i) {
        const double a = std::abs(A(i, j)) * rs(i);
        if (a == 0.0) continue;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      if (hi > 0.0) cs(j) = pow2(1.0 / std::sqrt(lo * hi));
    }
  }
  const Eigen::MatrixXd As = rs.asDiagonal() * A * cs.asDiagonal();
  const Eigen::VectorXd bs = rs.cwiseProduct(b);
  const Eigen::VectorXd costs = c.cwiseProduct(cs);
  const Eigen::VectorXd ls = lower.cwiseQuotient(cs), us = upper.cwiseQuotient(cs);

  BoundedSimplex<double>::Tolerances tol;
  tol.feasibility = options.feasibility_tol;
  tol.optimality = options.optimality_tol;
  tol.pivot = options.pivot_tol;
  tol.refactor_frequency = options.refactor_frequency;
  tol.max_iterations = options.max_iterations;

  // A singular refactorization means the updated inverse drifted; retry with
  // more frequent refactoring and a stricter pivot tolerance.
  SimplexResult<double> r;
  for (int attempt = 0; attempt < 3; ++attempt) {
    BoundedSimplex<double> simplex;
    r = simplex.solve(As, bs, sense, costs, ls, us, tol);
    if (r.status != SimplexStatus::Singular) break;
    tol.refactor_frequency = std::max(1, tol.refactor_frequency / 8);
    tol.pivot = std::max(tol.pivot * 100.0, 1e-9);
  }
  if (r.status == SimplexStatus::Optimal) {
    r.x = r.x.cwiseProduct(cs);
    r.y = r.y.cwiseProduct(rs);
    r.objective = c.dot(r.x);
  }

  LpSolution sol;
  sol.iterations = r.iterations;
  switch (r.status) {
    case SimplexStatus::Optimal:
      sol.status = Status::Optimal;
      break;
    case SimplexStatus::Infeasible:
      sol.status = Status::Infeasible;
      return sol;
    case SimplexStatus::Unbounded:
      sol.status = Status::Unbounded;
      return sol;
    case SimplexStatus::IterationLimit:
      throw NumericalFailure("simplex iteration limit reached");
    case SimplexStatus::Singular:
      throw NumericalFailure("singular basis during refactorization");
  }
  sol.objective = r.objective;
  sol.primal = r.x;
  sol.row_duals = r.y;
  sol.designated_duals.reserve(model.designated().size());
  for (int row : model.designated()) sol.designated_duals.emplace_back(row, r.y(row));
  return sol;
}

}  // namespace hydrosddp::lp
