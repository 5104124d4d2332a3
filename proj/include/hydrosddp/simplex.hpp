#ifndef HYDROSDDP_SIMPLEX_HPP
#define HYDROSDDP_SIMPLEX_HPP

// Dense bounded-variable primal simplex with an explicit basis inverse.
//
// Solves   min c'x   s.t.  A x (<=,=,>=) b,  lower <= x <= upper.
// Every row receives a logical column so the working system is [A I] z = b.
// Phase one adds artificial columns only for rows whose logical cannot absorb
// the initial residual.

#include "hydrosddp/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace hydrosddp::lp {

enum class SimplexStatus { Optimal, Infeasible, Unbounded, IterationLimit, Singular };

template <typename Scalar>
struct SimplexResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  SimplexStatus status = SimplexStatus::Infeasible;
  Vector x;  // structural values
  Vector y;  // row duals
  Scalar objective = 0;
  int iterations = 0;
};

template <typename Scalar>
class BoundedSimplex {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Tolerances {
    Scalar feasibility = Scalar(1e-7);
    Scalar optimality = Scalar(1e-9);
    Scalar pivot = Scalar(1e-11);
    int refactor_frequency = 64;
    int max_iterations = 0;
  };

  SimplexResult<Scalar> solve(const Matrix& A, const Vector& b, const std::vector<Sense>& sense,
                              const Vector& c, const Vector& lower, const Vector& upper,
                              const Tolerances& tol) {
    tol_ = tol;
    m_ = static_cast<int>(A.rows());
    n_ = static_cast<int>(A.cols());
    b_ = b;
    iterations_ = 0;
    max_iterations_ = tol.max_iterations > 0 ? tol.max_iterations : 50 * (m_ + n_) + 1000;

    SimplexResult<Scalar> result;
    for (int j = 0; j < n_; ++j) {
      if (lower(j) > upper(j)) {
        result.status = SimplexStatus::Infeasible;
        return result;
      }
    }

    setup(A, sense, lower, upper);

    if (num_art_ > 0) {
      cost_.setZero(cols_);
      cost_.tail(num_art_).setOnes();
      const SimplexStatus s = run();
      if (s != SimplexStatus::Optimal) {
        result.status = s;
        result.iterations = iterations_;
        return result;
      }
      Scalar infeasibility = 0;
      for (int k = n_ + m_; k < cols_; ++k) infeasibility += x_(k);
      const Scalar scale = std::max<Scalar>(Scalar(1), b_.size() ? b_.cwiseAbs().maxCoeff() : Scalar(0));
      if (infeasibility > tol_.feasibility * scale) {
        result.status = SimplexStatus::Infeasible;
        result.iterations = iterations_;
        return result;
      }
      for (int k = n_ + m_; k < cols_; ++k) {
        upper_(k) = 0;
        if (state_[k] != kBasic) {
          state_[k] = kFixed;
          x_(k) = 0;
        }
      }
    }

    cost_.setZero(cols_);
    cost_.head(n_) = c;
    const SimplexStatus s = run();
    result.iterations = iterations_;
    result.status = s;
    if (s != SimplexStatus::Optimal) return result;

    result.x = x_.head(n_);
    result.y = duals();
    result.objective = c.dot(result.x);
    return result;
  }

 private:
  enum State : unsigned char { kBasic, kLower, kUpper, kFree, kFixed };

  static Scalar inf() { return std::numeric_limits<Scalar>::infinity(); }

  void setup(const Matrix& A, const std::vector<Sense>& sense, const Vector& lower,
             const Vector& upper) {
    const int max_cols = n_ + 2 * m_;
    M_.setZero(m_, max_cols);
    M_.leftCols(n_) = A;
    M_.block(0, n_, m_, m_).setIdentity();
    lower_.resize(max_cols);
    upper_.resize(max_cols);
    x_.setZero(max_cols);
    state_.assign(max_cols, kFixed);
    lower_.head(n_) = lower;
    upper_.head(n_) = upper;

    for (int j = 0; j < n_; ++j) {
      if (lower_(j) == upper_(j)) {
        state_[j] = kFixed;
        x_(j) = lower_(j);
      } else if (std::isfinite(static_cast<double>(lower_(j)))) {
        state_[j] = kLower;
        x_(j) = lower_(j);
      } else if (std::isfinite(static_cast<double>(upper_(j)))) {
        state_[j] = kUpper;
        x_(j) = upper_(j);
      } else {
        state_[j] = kFree;
        x_(j) = 0;
      }
    }

    const Vector residual = b_ - A * x_.head(n_);
    head_.assign(m_, -1);
    Binv_.setIdentity(m_, m_);
    num_art_ = 0;
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      switch (sense[i]) {
        case Sense::LessEqual:
          lower_(s) = 0;
          upper_(s) = inf();
          break;
        case Sense::GreaterEqual:
          lower_(s) = -inf();
          upper_(s) = 0;
          break;
        case Sense::Equal:
          lower_(s) = 0;
          upper_(s) = 0;
          break;
      }
      const Scalar r = residual(i);
      if (r >= lower_(s) - tol_.feasibility && r <= upper_(s) + tol_.feasibility) {
        state_[s] = kBasic;
        x_(s) = r;
        head_[i] = s;
        continue;
      }
      const Scalar v = std::clamp(r, lower_(s), upper_(s));
      x_(s) = v;
      state_[s] = lower_(s) == upper_(s) ? kFixed : (v == lower_(s) ? kLower : kUpper);
      const int a = n_ + m_ + num_art_++;
      const Scalar sign = r > v ? Scalar(1) : Scalar(-1);
      M_(i, a) = sign;
      lower_(a) = 0;
      upper_(a) = inf();
      x_(a) = std::abs(r - v);
      state_[a] = kBasic;
      head_[i] = a;
      Binv_(i, i) = sign;
    }
    cols_ = n_ + m_ + num_art_;
    since_refactor_ = 0;
  }

  Vector basic_costs() const {
    Vector cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost_(head_[i]);
    return cb;
  }

  Vector duals() const { return Binv_.transpose() * basic_costs(); }

  bool refactor() {
    Matrix B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = M_.col(head_[i]);
    Eigen::FullPivLU<Matrix> lu(B);
    if (!lu.isInvertible()) return false;
    Binv_ = lu.inverse();
    Vector rhs = b_;
    for (int j = 0; j < cols_; ++j) {
      if (state_[j] != kBasic && x_(j) != 0) rhs -= M_.col(j) * x_(j);
    }
    const Vector xb = Binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_(head_[i]) = xb(i);
    since_refactor_ = 0;
    return true;
  }

  SimplexStatus run() {
    const Scalar cost_scale =
        std::max<Scalar>(Scalar(1), cols_ ? cost_.head(cols_).cwiseAbs().maxCoeff() : Scalar(0));
    const Scalar dj_tol = tol_.optimality * cost_scale;
    int degenerate = 0;
    bool bland = false;

    while (true) {
      if (iterations_ >= max_iterations_) return SimplexStatus::IterationLimit;
      if (since_refactor_ >= tol_.refactor_frequency && !refactor()) return SimplexStatus::Singular;

      const Vector y = duals();
      int enter = -1;
      Scalar best = 0;
      Scalar enter_dir = 0;
      for (int j = 0; j < cols_; ++j) {
        const State st = state_[j];
        if (st == kBasic || st == kFixed) continue;
        const Scalar d = cost_(j) - y.dot(M_.col(j));
        Scalar dir = 0;
        if (st == kLower && d < -dj_tol) dir = 1;
        else if (st == kUpper && d > dj_tol) dir = -1;
        else if (st == kFree && std::abs(d) > dj_tol) dir = d < 0 ? 1 : -1;
        if (dir == 0) continue;
        if (bland) {
          enter = j;
          enter_dir = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter < 0) return SimplexStatus::Optimal;

      const Vector alpha = Binv_ * M_.col(enter);
      // Harris two-pass ratio test: find the largest step allowed with bounds
      // relaxed by the feasibility tolerance, then pivot on the largest
      // |alpha| among rows that block within that step.
      auto row_limit = [&](int i, Scalar slack, bool* to_upper) {
        const Scalar delta = enter_dir * alpha(i);
        const int v = head_[i];
        if (delta > 0) {
          *to_upper = false;
          if (!std::isfinite(static_cast<double>(lower_(v)))) return inf();
          return (x_(v) - lower_(v) + slack) / delta;
        }
        *to_upper = true;
        if (!std::isfinite(static_cast<double>(upper_(v)))) return inf();
        return (upper_(v) - x_(v) + slack) / -delta;
      };
      Scalar relaxed = inf();
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha(i)) <= tol_.pivot) continue;
        bool up;
        relaxed = std::min(relaxed, row_limit(i, tol_.feasibility, &up));
      }
      Scalar step = inf();
      int leave = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha(i)) <= tol_.pivot) continue;
        bool to_upper;
        Scalar limit = row_limit(i, Scalar(0), &to_upper);
        if (!std::isfinite(static_cast<double>(limit)) || limit > relaxed) continue;
        if (limit < 0) limit = 0;
        bool take = leave < 0;
        if (!take) {
          take = bland ? head_[i] < head_[leave] : std::abs(alpha(i)) > std::abs(alpha(leave));
        }
        if (take) {
          step = limit;
          leave = i;
          leave_to_upper = to_upper;
        }
      }

      const Scalar flip = upper_(enter) - lower_(enter);
      const bool can_flip = std::isfinite(static_cast<double>(flip));
      if (leave < 0 && !can_flip) return SimplexStatus::Unbounded;
      ++iterations_;

      if (can_flip && (leave < 0 || flip <= step)) {
        x_(enter) += enter_dir * flip;
        state_[enter] = enter_dir > 0 ? kUpper : kLower;
        for (int i = 0; i < m_; ++i) x_(head_[i]) -= enter_dir * flip * alpha(i);
        degenerate = 0;
        bland = false;
        continue;
      }

      for (int i = 0; i < m_; ++i) x_(head_[i]) -= enter_dir * step * alpha(i);
      x_(enter) += enter_dir * step;
      const int out = head_[leave];
      x_(out) = leave_to_upper ? upper_(out) : lower_(out);
      state_[out] = lower_(out) == upper_(out) ? kFixed : (leave_to_upper ? kUpper : kLower);
      state_[enter] = kBasic;
      head_[leave] = enter;

      const Scalar pivot = alpha(leave);
      Binv_.row(leave) /= pivot;
      for (int i = 0; i < m_; ++i) {
        if (i != leave && alpha(i) != 0) Binv_.row(i) -= alpha(i) * Binv_.row(leave);
      }
      ++since_refactor_;

      if (step <= tol_.pivot) {
        if (++degenerate > 30) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  Tolerances tol_;
  int m_ = 0;
  int n_ = 0;
  int cols_ = 0;
  int num_art_ = 0;
  int iterations_ = 0;
  int max_iterations_ = 0;
  int since_refactor_ = 0;
  Matrix M_;
  Matrix Binv_;
  Vector b_;
  Vector cost_;
  Vector lower_;
  Vector upper_;
  Vector x_;
  std::vector<State> state_;
  std::vector<int> head_;
};

}  // namespace hydrosddp::lp

#endif  // HYDROSDDP_SIMPLEX_HPP
