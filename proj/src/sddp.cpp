#include "hydrosddp/sddp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace hydrosddp {

namespace {

std::string describe(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ']';
  return os.str();
}

// Relative tolerance for accepting theta as the pool maximum.
constexpr double kCutTol = 1e-11;

int sample_index(Rng& rng, const std::vector<double>& probabilities) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    acc += probabilities[k];
    if (u < acc) return static_cast<int>(k);
  }
  return -1;
}

int sample_outcome(Rng& rng, const NoiseDistribution& noise) {
  if (noise.size() == 1) return 0;
  std::vector<double> p;
  p.reserve(noise.size());
  for (const NoiseOutcome& o : noise.outcomes()) p.push_back(o.probability);
  const int k = sample_index(rng, p);
  return k < 0 ? noise.size() - 1 : k;
}

// Samples the next edge, or -1 for termination. No draw for a certain edge.
const Edge* sample_edge(Rng& rng, const std::vector<Edge>& edges) {
  if (edges.empty()) return nullptr;
  if (edges.size() == 1 && edges.front().probability >= 1.0) return &edges.front();
  std::vector<double> p;
  p.reserve(edges.size());
  for (const Edge& e : edges) p.push_back(e.probability);
  const int k = sample_index(rng, p);
  return k < 0 ? nullptr : &edges[k];
}

// Follows an edge without termination, picking proportionally among several.
const Edge* follow_edge(Rng& rng, const std::vector<Edge>& edges) {
  if (edges.empty()) return nullptr;
  if (edges.size() == 1) return &edges.front();
  double total = 0.0;
  for (const Edge& e : edges) total += e.probability;
  std::vector<double> p;
  for (const Edge& e : edges) p.push_back(e.probability / total);
  const int k = sample_index(rng, p);
  return &edges[k < 0 ? edges.size() - 1 : k];
}

TrajectoryStep make_step(int node, int outcome, const Eigen::VectorXd& payload,
                         const Eigen::VectorXd& state_in, double weight, StageResult&& r) {
  TrajectoryStep s;
  s.node = node;
  s.outcome = outcome;
  s.payload = payload;
  s.state_in = state_in;
  s.state_out = std::move(r.state_out);
  s.stage_cost = r.stage_cost;
  s.weight = weight;
  s.duals = std::move(r.duals);
  s.primal = std::move(r.primal);
  return s;
}

}  // namespace

void Problem::validate() const {
  graph.validate();
  if (templates.empty()) throw TrainingError("problem has no stage templates");
  const auto& names = templates.front().state_names;
  if (static_cast<int>(names.size()) != num_states()) {
    throw TrainingError("initial state dimension does not match the stage templates");
  }
  for (const StageTemplate& t : templates) {
    if (t.state_names != names) throw TrainingError("stage '" + t.name + "' has a different state layout");
    if (t.theta_var < 0) throw TrainingError("stage '" + t.name + "' has no cost-to-go variable");
  }
  for (const GraphNode& n : graph.nodes()) {
    if (n.stage_template < 0 || n.stage_template >= static_cast<int>(templates.size())) {
      throw TrainingError("node '" + n.name + "' references a missing stage template");
    }
  }
}

InfeasibleSubproblem::InfeasibleSubproblem(std::string node, Eigen::VectorXd state,
                                           Eigen::VectorXd noise)
    : std::runtime_error("infeasible subproblem at node '" + node + "', state " + describe(state) +
                         ", noise " + describe(noise)),
      node_(std::move(node)),
      state_(std::move(state)),
      noise_(std::move(noise)) {}

void CutPool::add(double intercept, const Eigen::VectorXd& slope, int iteration) {
  if (slope.size() != dim_) throw TrainingError("cut dimension mismatch");
  if (!std::isfinite(intercept) || !slope.allFinite()) throw TrainingError("non-finite cut");
  intercepts_.push_back(intercept);
  slopes_.insert(slopes_.end(), slope.data(), slope.data() + dim_);
  iterations_.push_back(iteration);
}

Cut CutPool::cut(int k) const {
  Cut c;
  c.intercept = intercepts_.at(k);
  c.slope = Eigen::Map<const Eigen::VectorXd>(slopes_.data() + static_cast<std::size_t>(k) * dim_, dim_);
  c.iteration = iterations_.at(k);
  return c;
}

double CutPool::value(int k, const Eigen::VectorXd& x) const {
  const double* s = slopes_.data() + static_cast<std::size_t>(k) * dim_;
  double v = intercepts_[k];
  for (int d = 0; d < dim_; ++d) v += s[d] * x(d);
  return v;
}

int CutPool::argmax(const Eigen::VectorXd& x, double* value) const {
  if (intercepts_.empty()) return -1;
  const int n = size();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(
      slopes_.data(), n, dim_);
  const Eigen::VectorXd values =
      Eigen::Map<const Eigen::VectorXd>(intercepts_.data(), n) + (dim_ ? (S * x).eval() : Eigen::VectorXd::Zero(n));
  Eigen::Index best = 0;
  const double v = values.maxCoeff(&best);
  if (value) *value = v;
  return static_cast<int>(best);
}

Policy Policy::empty(const Problem& problem) {
  Policy p;
  p.state_names = problem.state_names();
  p.pools.assign(problem.graph.num_nodes(), CutPool(problem.num_states()));
  return p;
}

void Policy::check_compatible(const Problem& problem) const {
  if (state_names != problem.state_names()) throw TrainingError("policy state names do not match the problem");
  if (static_cast<int>(pools.size()) != problem.graph.num_nodes()) {
    throw TrainingError("policy node count does not match the problem");
  }
}

int Policy::total_cuts() const {
  int n = 0;
  for (const CutPool& p : pools) n += p.size();
  return n;
}

double Trajectory::total_cost() const {
  double c = 0.0;
  for (const TrajectoryStep& s : steps) c += s.stage_cost;
  return c;
}

double Trajectory::discounted_cost() const {
  double c = 0.0;
  for (const TrajectoryStep& s : steps) c += s.weight * s.stage_cost;
  return c;
}

StageSolver::StageSolver(const Problem& problem, lp::SolverOptions options)
    : problem_(&problem), options_(options) {
  for (const StageTemplate& t : problem.templates) {
    working_.push_back(t.model);
    base_rows_.push_back(t.model.num_rows());
  }
  active_.resize(problem.graph.num_nodes());
}

StageResult StageSolver::solve(const Policy& policy, int node, const Eigen::VectorXd& state_in,
                               const Eigen::VectorXd& payload, bool keep_primal) {
  const GraphNode& gn = problem_->graph.node(node);
  const int t = gn.stage_template;
  const StageTemplate& tpl = problem_->templates[t];
  lp::LpModel& work = working_[t];
  work.truncate_rows(base_rows_[t]);
  tpl.instantiate(work, state_in, payload);

  const CutPool& pool = policy.pools[node];
  std::vector<int>& active = active_[node];
  std::erase_if(active, [&](int k) { return k >= pool.size(); });
  if (active.empty() && pool.size() > 0) active.push_back(pool.argmax(state_in));

  auto add_cut_row = [&](int k) {
    const Cut c = pool.cut(k);
    std::vector<lp::Term> terms;
    terms.reserve(c.slope.size() + 1);
    terms.push_back({tpl.theta_var, 1.0});
    for (Eigen::Index d = 0; d < c.slope.size(); ++d) {
      if (c.slope(d) != 0.0) terms.push_back({tpl.state_out_vars[d], -c.slope(d)});
    }
    work.add_row("", std::move(terms), lp::Sense::GreaterEqual, c.intercept);
  };
  for (int k : active) add_cut_row(k);

  const int n_states = tpl.num_states();
  Eigen::VectorXd x_out(n_states);
  lp::LpSolution sol;
  for (int round = 0; round <= pool.size(); ++round) {
    sol = lp::solve(work, options_);
    ++lp_solves_;
    if (sol.status == lp::Status::Infeasible) throw InfeasibleSubproblem(gn.name, state_in, payload);
    if (sol.status == lp::Status::Unbounded) {
      throw TrainingError("unbounded subproblem at node '" + gn.name + "'");
    }
    for (int d = 0; d < n_states; ++d) x_out(d) = sol.primal(tpl.state_out_vars[d]);
    if (pool.size() == 0) break;
    const double theta = sol.primal(tpl.theta_var);
    double best = 0.0;
    const int k = pool.argmax(x_out, &best);
    if (best - theta <= kCutTol * std::max(1.0, std::abs(theta))) break;
    if (std::find(active.begin(), active.end(), k) != active.end()) break;
    active.push_back(k);
    add_cut_row(k);
  }

  StageResult r;
  r.objective = sol.objective;
  r.theta = sol.primal(tpl.theta_var);
  r.stage_cost = sol.objective - r.theta;
  r.state_out = x_out;
  r.state_duals.resize(n_states);
  for (int d = 0; d < n_states; ++d) r.state_duals(d) = sol.row_duals(tpl.state_fix_rows[d]);
  r.duals.resize(static_cast<Eigen::Index>(sol.designated_duals.size()));
  for (std::size_t i = 0; i < sol.designated_duals.size(); ++i) r.duals(i) = sol.designated_duals[i].second;
  if (keep_primal) r.primal = sol.primal;

  // Keep only the binding cuts as the starting set for the next solve.
  const double scale = std::max(1.0, std::abs(r.theta));
  std::erase_if(active, [&](int k) { return pool.value(k, x_out) < r.theta - 1e-9 * scale; });
  return r;
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

int default_max_depth(const Problem& problem, int cycles) {
  const int operating = problem.graph.num_nodes() - (problem.graph.investment_node() ? 1 : 0);
  return cycles * operating + (problem.graph.investment_node() ? 1 : 0);
}

Trajectory forward_pass(const Problem& problem, const Policy& policy, Rng& rng, int max_depth,
                        StageSolver& solver) {
  Trajectory traj;
  Eigen::VectorXd state = problem.initial_state;
  const Edge* edge = sample_edge(rng, problem.graph.root_edges());
  double weight = 1.0;
  while (edge && static_cast<int>(traj.steps.size()) < max_depth) {
    weight *= edge->probability;
    const int node = edge->to;
    const NoiseDistribution& noise = problem.graph.node(node).noise;
    const int outcome = sample_outcome(rng, noise);
    StageResult r = solver.solve(policy, node, state, noise[outcome].payload);
    Eigen::VectorXd next = r.state_out;
    traj.steps.push_back(make_step(node, outcome, noise[outcome].payload, state, weight, std::move(r)));
    state = std::move(next);
    edge = sample_edge(rng, problem.graph.node(node).children);
  }
  return traj;
}

void backward_pass(const Problem& problem, Policy& policy, const Trajectory& trajectory,
                   StageSolver& solver, int iteration) {
  const int n_states = problem.num_states();
  for (auto step = trajectory.steps.rbegin(); step != trajectory.steps.rend(); ++step) {
    const GraphNode& gn = problem.graph.node(step->node);
    if (gn.children.empty()) continue;
    const Eigen::VectorXd& x = step->state_out;
    double intercept = 0.0;
    Eigen::VectorXd slope = Eigen::VectorXd::Zero(n_states);
    for (const Edge& e : gn.children) {
      if (e.probability <= 0.0) continue;
      const NoiseDistribution& noise = problem.graph.node(e.to).noise;
      for (const NoiseOutcome& o : noise.outcomes()) {
        const StageResult r = solver.solve(policy, e.to, x, o.payload);
        const double w = e.probability * o.probability;
        intercept += w * (r.objective - r.state_duals.dot(x));
        slope += w * r.state_duals;
      }
    }
    policy.pools[step->node].add(intercept, slope, iteration);
  }
}

void StageSolver::reset() {
  for (auto& a : active_) a.clear();
}

double lower_bound(const Problem& problem, const Policy& policy, StageSolver& solver) {
  double bound = 0.0;
  for (const Edge& e : problem.graph.root_edges()) {
    for (const NoiseOutcome& o : problem.graph.node(e.to).noise.outcomes()) {
      bound += e.probability * o.probability *
               solver.solve(policy, e.to, problem.initial_state, o.payload).objective;
    }
  }
  return bound;
}

double lower_bound(const Problem& problem, const Policy& policy) {
  policy.check_compatible(problem);
  StageSolver solver(problem);
  return lower_bound(problem, policy, solver);
}

Policy train(const Problem& problem, const TrainingOptions& options) {
  problem.validate();
  Policy policy = Policy::empty(problem);
  train(problem, policy, options);
  return policy;
}

void train(const Problem& problem, Policy& policy, const TrainingOptions& options) {
  if (options.iterations <= 0) throw TrainingError("iteration limit must be positive");
  if (options.forward_passes <= 0) throw TrainingError("forward passes per iteration must be positive");
  policy.check_compatible(problem);
  const int max_depth = default_max_depth(problem, options.max_depth_cycles);
  const int threads = std::max(1, std::min(options.threads, options.forward_passes));

  std::vector<StageSolver> solvers;
  for (int w = 0; w < threads; ++w) solvers.emplace_back(problem, options.lp);

  const auto start = std::chrono::steady_clock::now();
  const int first = policy.iterations + 1;
  for (int it = first; it < first + options.iterations; ++it) {
    std::vector<Trajectory> trajectories(options.forward_passes);
    auto run_pass = [&](int pass, StageSolver& solver) {
      Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(pass)));
      solver.reset();
      trajectories[pass] = forward_pass(problem, policy, rng, max_depth, solver);
    };
    if (threads == 1) {
      for (int pass = 0; pass < options.forward_passes; ++pass) run_pass(pass, solvers[0]);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (int pass = w; pass < options.forward_passes; pass += threads) run_pass(pass, solvers[w]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (std::thread& t : pool) t.join();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    double forward_cost = 0.0;
    solvers[0].reset();
    for (const Trajectory& t : trajectories) {
      backward_pass(problem, policy, t, solvers[0], it);
      forward_cost += t.total_cost();
    }
    forward_cost /= options.forward_passes;
    policy.iterations = it;

    TrainingRecord rec;
    rec.iteration = it;
    solvers[0].reset();
    rec.lower_bound = lower_bound(problem, policy, solvers[0]);
    rec.forward_cost = forward_cost;
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    policy.log.push_back(rec);
    if (options.on_iteration) options.on_iteration(policy, rec);
  }
}

namespace {

Trajectory simulate_one(const Problem& problem, const Policy& policy, const ScenarioSource& source,
                        int replication, int max_depth, const SimulationOptions& options,
                        StageSolver& solver) {
  Trajectory traj;
  Eigen::VectorXd state = problem.initial_state;
  Rng rng(derive_seed(options.seed, 0x5151, static_cast<std::uint64_t>(replication)));

  if (source.historical) {
    const std::vector<Eigen::VectorXd>& sequence = source.sequences.at(replication);
    std::size_t next_payload = 0;
    const Edge* edge = follow_edge(rng, problem.graph.root_edges());
    double weight = 1.0;
    const auto inv = problem.graph.investment_node();
    while (edge) {
      const int node = edge->to;
      const bool is_investment = inv && *inv == node;
      if (!is_investment && next_payload >= sequence.size()) break;
      weight *= edge->probability;
      Eigen::VectorXd payload = is_investment ? problem.graph.node(node).noise[0].payload
                                              : sequence[next_payload++];
      StageResult r = solver.solve(policy, node, state, payload, options.keep_primal);
      Eigen::VectorXd next = r.state_out;
      traj.steps.push_back(make_step(node, -1, payload, state, weight, std::move(r)));
      state = std::move(next);
      const auto& children = problem.graph.node(node).children;
      edge = nullptr;
      for (const Edge& e : children) {
        if (!edge || e.probability > edge->probability) edge = &e;
      }
    }
    return traj;
  }

  const Edge* edge = options.estimator == Estimator::Sampled
                         ? sample_edge(rng, problem.graph.root_edges())
                         : follow_edge(rng, problem.graph.root_edges());
  double weight = 1.0;
  while (edge && static_cast<int>(traj.steps.size()) < max_depth) {
    if (options.estimator == Estimator::Sampled) {
      weight *= edge->probability;
    } else {
      double total = 0.0;
      for (const Edge& e : traj.steps.empty() ? problem.graph.root_edges()
                                              : problem.graph.node(traj.steps.back().node).children) {
        total += e.probability;
      }
      weight *= total;
    }
    const int node = edge->to;
    const NoiseDistribution& noise = problem.graph.node(node).noise;
    const int outcome = sample_outcome(rng, noise);
    StageResult r = solver.solve(policy, node, state, noise[outcome].payload, options.keep_primal);
    Eigen::VectorXd next = r.state_out;
    traj.steps.push_back(make_step(node, outcome, noise[outcome].payload, state, weight, std::move(r)));
    state = std::move(next);
    const auto& children = problem.graph.node(node).children;
    edge = options.estimator == Estimator::Sampled ? sample_edge(rng, children) : follow_edge(rng, children);
  }
  return traj;
}

}  // namespace

std::vector<Trajectory> simulate(const Problem& problem, const Policy& policy,
                                 const ScenarioSource& source, int replications,
                                 const SimulationOptions& options) {
  policy.check_compatible(problem);
  if (replications < 0) throw TrainingError("replication count must be non-negative");
  if (source.historical) {
    if (replications > static_cast<int>(source.sequences.size())) {
      throw TrainingError("more replications requested than historical sequences");
    }
    for (int r = 0; r < replications; ++r) {
      for (const Eigen::VectorXd& p : source.sequences[r]) {
        bool matches = false;
        for (const GraphNode& n : problem.graph.nodes()) matches |= n.noise.payload_size() == p.size();
        if (!matches) throw TrainingError("historical payload dimension does not match any node's noise");
      }
      for (const GraphNode& n : problem.graph.nodes()) {
        if (problem.graph.investment_node() && n.name == problem.graph.node(*problem.graph.investment_node()).name) {
          continue;
        }
        if (!source.sequences[r].empty() && n.noise.payload_size() != source.sequences[r].front().size()) {
          throw TrainingError("historical payload dimension does not match node '" + n.name + "'");
        }
      }
    }
  }
  const int max_depth = options.max_depth > 0 ? options.max_depth : default_max_depth(problem);
  std::vector<Trajectory> out(replications);
  const int threads = std::max(1, std::min(options.threads, replications));
  if (threads == 1) {
    StageSolver solver(problem, options.lp);
    for (int r = 0; r < replications; ++r) {
      out[r] = simulate_one(problem, policy, source, r, max_depth, options, solver);
    }
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        StageSolver solver(problem, options.lp);
        for (int r = w; r < replications; r += threads) {
          out[r] = simulate_one(problem, policy, source, r, max_depth, options, solver);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Eigen::VectorXd first_stage_solution(const Problem& problem, const Policy& policy) {
  const auto inv = problem.graph.investment_node();
  if (!inv) throw TrainingError("problem has no investment root");
  policy.check_compatible(problem);
  StageSolver solver(problem);
  const StageResult r =
      solver.solve(policy, *inv, problem.initial_state, problem.graph.node(*inv).noise[0].payload);
  Eigen::VectorXd u(problem.investment_states.size());
  for (std::size_t k = 0; k < problem.investment_states.size(); ++k) {
    u(k) = r.state_out(problem.investment_states[k]);
  }
  return u;
}

}  // namespace hydrosddp
