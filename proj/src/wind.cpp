#include "hydrosddp/wind.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hydrosddp {

void WindTraces::validate() const {
  const Eigen::Index R = static_cast<Eigen::Index>(regions.size());
  if (R == 0) throw WindError("wind traces have no regions");
  if (shares.size() != R) throw WindError("one share per wind region required");
  if ((shares.array() < 0.0).any()) throw WindError("wind shares must be non-negative");
  if (std::abs(shares.sum() - 1.0) > 1e-9) throw WindError("wind shares must sum to one");
  if (years < 1) throw WindError("wind years must be positive");
  for (std::size_t t = 0; t < factors.size(); ++t) {
    const Eigen::MatrixXd& f = factors[t];
    if (f.cols() != R) throw WindError("week " + std::to_string(t + 1) + ": wrong number of wind regions");
    if (f.rows() % years != 0) throw WindError("week " + std::to_string(t + 1) + ": observations not a multiple of years");
    if (!f.allFinite() || (f.array() < 0.0).any() || (f.array() > 1.0 + kOvershoot).any()) {
      throw WindError("week " + std::to_string(t + 1) + ": capacity factor outside [0, 1.05]");
    }
  }
}

int WindTraces::overshoot_count() const {
  int n = 0;
  for (const Eigen::MatrixXd& f : factors) n += static_cast<int>((f.array() > 1.0).count());
  return n;
}

Eigen::MatrixXd net_demand(const Eigen::MatrixXd& demand, const Eigen::MatrixXd& factors,
                           const Eigen::VectorXd& shares, double capacity) {
  if (demand.rows() != factors.rows() || demand.cols() != factors.cols() || shares.size() != factors.cols()) {
    throw WindError("net demand: shape mismatch");
  }
  if (!(capacity >= 0.0)) throw WindError("net demand: capacity must be non-negative");
  return demand - capacity * factors * shares.asDiagonal();
}

Eigen::VectorXd system_net_demand(const Eigen::VectorXd& demand, const Eigen::MatrixXd& factors,
                                  const Eigen::VectorXd& shares, double capacity) {
  if (demand.size() != factors.rows() || shares.size() != factors.cols()) {
    throw WindError("net demand: shape mismatch");
  }
  if (!(capacity >= 0.0)) throw WindError("net demand: capacity must be non-negative");
  return demand - capacity * (factors * shares);
}

BlockAssignment build_blocks(const Eigen::VectorXd& series, const std::vector<int>& counts) {
  if (counts.empty()) throw WindError("at least one load block required");
  long total = 0;
  for (int c : counts) {
    if (c < 1) throw WindError("every load block needs at least one hour");
    total += c;
  }
  if (total != series.size()) {
    throw WindError("block hours sum to " + std::to_string(total) + " but the series has " +
                    std::to_string(series.size()) + " hours");
  }
  BlockAssignment a;
  a.order.resize(series.size());
  std::iota(a.order.begin(), a.order.end(), 0);
  std::stable_sort(a.order.begin(), a.order.end(), [&](int i, int j) { return series(i) > series(j); });
  a.block_of.assign(series.size(), 0);
  a.levels = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(counts.size()));
  std::size_t pos = 0;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    for (int k = 0; k < counts[b]; ++k, ++pos) {
      a.block_of[a.order[pos]] = static_cast<int>(b);
      a.levels(b) += series(a.order[pos]);
    }
    a.levels(b) /= counts[b];
  }
  return a;
}

int WindSlopeTable::clamped_count() const {
  int n = 0;
  for (const Eigen::MatrixXd& m : raw_mu) n += static_cast<int>((m.array() < 0.0).count());
  return n;
}

std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const Eigen::Map<const Eigen::VectorXd> X(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::VectorXd dx = X.array() - X.mean();
  const double sxx = dx.squaredNorm();
  if (!(sxx > 0.0)) throw WindError("capacity grid needs at least two distinct points");
  const double slope = dx.dot(Y) / sxx;
  const double intercept = Y.mean() - slope * X.mean();
  const double residual = (Y.array() - intercept - slope * X.array()).matrix().norm();
  return {slope, residual};
}

std::vector<int> observation_counts(const std::vector<int>& block_hours, int years) {
  std::vector<int> counts(block_hours);
  for (int& c : counts) c *= years;
  return counts;
}

Eigen::MatrixXd block_wind_output(const Eigen::VectorXd& demand, const Eigen::MatrixXd& factors,
                                  const Eigen::VectorXd& shares, double capacity,
                                  const std::vector<int>& counts) {
  const BlockAssignment a = build_blocks(system_net_demand(demand, factors, shares, capacity), counts);
  const Eigen::Index R = factors.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(R, static_cast<Eigen::Index>(counts.size()));
  for (Eigen::Index h = 0; h < factors.rows(); ++h) out.col(a.block_of[h]) += factors.row(h).transpose();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out.col(b) = (capacity / counts[b]) * shares.cwiseProduct(out.col(b));
  }
  return out;
}

WindSlopeTable fit_slopes(const std::vector<Eigen::VectorXd>& demand, const WindTraces& traces,
                          const WindFitOptions& options) {
  traces.validate();
  if (demand.size() != traces.factors.size()) throw WindError("demand and wind traces cover different weeks");
  if (options.grid.size() < 2) throw WindError("capacity grid needs at least two points");
  const auto [lo, hi] = std::minmax_element(options.grid.begin(), options.grid.end());
  if (*lo == *hi) throw WindError("capacity grid is degenerate");
  if (*lo < 0.0) throw WindError("capacity grid must be non-negative");
  if (options.nominal < *lo || options.nominal > *hi) throw WindError("nominal capacity outside the grid");

  WindSlopeTable table;
  table.regions = traces.regions;
  table.block_hours = options.block_hours;
  table.nominal = options.nominal;
  table.grid = options.grid;
  const std::vector<int> counts = observation_counts(options.block_hours, traces.years);
  const Eigen::Index R = static_cast<Eigen::Index>(traces.regions.size());
  const Eigen::Index B = static_cast<Eigen::Index>(counts.size());

  for (int t = 0; t < traces.num_weeks(); ++t) {
    const Eigen::MatrixXd& f = traces.factors[t];
    table.nominal_blocks.push_back(
        build_blocks(system_net_demand(demand[t], f, traces.shares, options.nominal), counts));

    std::vector<Eigen::MatrixXd> outputs;
    for (double K : options.grid) outputs.push_back(block_wind_output(demand[t], f, traces.shares, K, counts));

    Eigen::MatrixXd raw(R, B), res(R, B);
    std::vector<double> y(options.grid.size());
    for (Eigen::Index r = 0; r < R; ++r) {
      for (Eigen::Index b = 0; b < B; ++b) {
        for (std::size_t g = 0; g < options.grid.size(); ++g) y[g] = outputs[g](r, b);
        const auto [slope, residual] = ols_slope(options.grid, y);
        raw(r, b) = slope;
        res(r, b) = residual;
      }
    }
    table.raw_mu.push_back(raw);
    table.mu.push_back(raw.cwiseMax(0.0));
    table.residual.push_back(res);
  }
  return table;
}

BlockShapeReport block_shape_check(const Eigen::VectorXd& demand, const Eigen::MatrixXd& factors,
                                   const Eigen::VectorXd& shares, const std::vector<double>& grid,
                                   const std::vector<int>& counts, double tolerance) {
  BlockShapeReport rep;
  rep.grid = grid;
  std::sort(rep.grid.begin(), rep.grid.end());
  const Eigen::Index n = static_cast<Eigen::Index>(rep.grid.size());
  rep.first.resize(n);
  rep.last.resize(n);
  for (Eigen::Index g = 0; g < n; ++g) {
    const Eigen::VectorXd series = system_net_demand(demand, factors, shares, rep.grid[g]);
    const BlockAssignment a = build_blocks(series, counts);
    rep.first(g) = a.levels(0) * counts.front();
    rep.last(g) = a.levels(a.levels.size() - 1) * counts.back();
  }

  const double scale = std::max({1.0, rep.first.cwiseAbs().maxCoeff(), rep.last.cwiseAbs().maxCoeff()});
  const double tol = tolerance * scale;
  rep.min_first_curvature = 0.0;
  rep.max_last_curvature = 0.0;
  double prev_first = 0.0, prev_last = 0.0;
  for (Eigen::Index g = 1; g < n; ++g) {
    const double dk = rep.grid[g] - rep.grid[g - 1];
    if (dk <= 0.0) continue;
    const double d1 = rep.first(g) - rep.first(g - 1);
    const double dB = rep.last(g) - rep.last(g - 1);
    if (d1 > tol) rep.first_nonincreasing = false;
    if (dB > tol) rep.last_nonincreasing = false;
    const double s1 = d1 / dk, sB = dB / dk;
    if (g > 1) {
      // Slope changes, scaled back to a unit step so the tolerance is comparable.
      const double c1 = (s1 - prev_first) * dk, cB = (sB - prev_last) * dk;
      rep.min_first_curvature = std::min(rep.min_first_curvature, c1);
      rep.max_last_curvature = std::max(rep.max_last_curvature, cB);
      if (c1 < -tol) rep.first_convex = false;
      if (cB > tol) rep.last_concave = false;
    }
    prev_first = s1;
    prev_last = sB;
  }
  return rep;
}

}  // namespace hydrosddp
