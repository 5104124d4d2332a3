#include "hydrosddp/policy_graph.hpp"

#include "hydrosddp/investment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hydrosddp {

namespace {
constexpr double kProbTol = 1e-12;
}

NoiseDistribution::NoiseDistribution() : outcomes_{{Eigen::VectorXd(), 1.0}} {}

NoiseDistribution::NoiseDistribution(std::vector<NoiseOutcome> outcomes)
    : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw GraphError("noise distribution must not be empty");
  double total = 0.0;
  for (const NoiseOutcome& o : outcomes_) {
    if (!(o.probability > 0.0)) throw GraphError("noise probabilities must be positive");
    if (o.payload.size() != outcomes_.front().payload.size()) {
      throw GraphError("noise payloads must share one dimension");
    }
    total += o.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) throw GraphError("noise probabilities must sum to one");
}

NoiseDistribution NoiseDistribution::deterministic(Eigen::VectorXd payload) {
  return NoiseDistribution({{std::move(payload), 1.0}});
}

NoiseDistribution NoiseDistribution::uniform(const std::vector<Eigen::VectorXd>& payloads) {
  std::vector<NoiseOutcome> outcomes;
  outcomes.reserve(payloads.size());
  for (const Eigen::VectorXd& p : payloads) {
    outcomes.push_back({p, 1.0 / static_cast<double>(payloads.size())});
  }
  return NoiseDistribution(std::move(outcomes));
}

int PolicyGraph::add_node(std::string name, int stage_template, NoiseDistribution noise) {
  nodes_.push_back({std::move(name), stage_template, std::move(noise), {}});
  return num_nodes() - 1;
}

void PolicyGraph::add_root_edge(int to, double probability) {
  if (to < 0 || to >= num_nodes()) throw GraphError("root edge to unknown node");
  root_edges_.push_back({to, probability});
}

void PolicyGraph::add_edge(int from, int to, double probability) {
  if (from < 0 || from >= num_nodes() || to < 0 || to >= num_nodes()) {
    throw GraphError("edge references unknown node");
  }
  nodes_[from].children.push_back({to, probability});
}

void PolicyGraph::set_noise(int node, NoiseDistribution noise) { nodes_.at(node).noise = std::move(noise); }

void PolicyGraph::mark_investment_node(int node) {
  if (investment_node_) throw GraphError("graph already has an investment root");
  investment_node_ = node;
}

void PolicyGraph::validate() const {
  if (nodes_.empty()) throw GraphError("policy graph has no nodes");
  if (root_edges_.empty()) throw GraphError("policy graph has no entry node");

  auto check_edges = [](const std::vector<Edge>& edges, const std::string& where) {
    double total = 0.0;
    for (const Edge& e : edges) {
      if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
        throw GraphError("edge probability outside [0, 1] at " + where);
      }
      total += e.probability;
    }
    if (total > 1.0 + kProbTol) throw GraphError("outgoing probabilities exceed one at " + where);
  };
  check_edges(root_edges_, "root");
  for (const GraphNode& n : nodes_) check_edges(n.children, "node '" + n.name + "'");

  const int n = num_nodes();
  std::vector<char> reached(n, 0);
  std::vector<int> stack;
  for (const Edge& e : root_edges_) {
    if (e.probability > 0.0 && !reached[e.to]) {
      reached[e.to] = 1;
      stack.push_back(e.to);
    }
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const Edge& e : nodes_[v].children) {
      if (e.probability > 0.0 && !reached[e.to]) {
        reached[e.to] = 1;
        stack.push_back(e.to);
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!reached[v]) throw GraphError("node '" + nodes_[v].name + "' is unreachable from the root");
  }

  // A cycle made only of probability-one edges never terminates.
  std::vector<int> colour(n, 0);
  std::function<void(int)> dfs = [&](int v) {
    colour[v] = 1;
    for (const Edge& e : nodes_[v].children) {
      if (e.probability < 1.0) continue;
      if (colour[e.to] == 1) {
        throw GraphError("cycle through '" + nodes_[v].name + "' has probability one");
      }
      if (colour[e.to] == 0) dfs(e.to);
    }
    colour[v] = 2;
  };
  for (int v = 0; v < n; ++v) {
    if (colour[v] == 0) dfs(v);
  }

  // Every node must be able to reach a node with termination probability.
  std::vector<std::vector<int>> parents(n);
  std::vector<char> drains(n, 0);
  for (int v = 0; v < n; ++v) {
    double total = 0.0;
    for (const Edge& e : nodes_[v].children) {
      total += e.probability;
      if (e.probability > 0.0) parents[e.to].push_back(v);
    }
    if (total < 1.0 - kProbTol) {
      drains[v] = 1;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : parents[v]) {
      if (!drains[p]) {
        drains[p] = 1;
        stack.push_back(p);
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!drains[v]) throw GraphError("node '" + nodes_[v].name + "' can never terminate");
  }
}

Eigen::VectorXd PolicyGraph::expected_visits() const {
  validate();
  const int n = num_nodes();
  Eigen::MatrixXd transfer = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd entry = Eigen::VectorXd::Zero(n);
  for (const Edge& e : root_edges_) entry(e.to) += e.probability;
  for (int v = 0; v < n; ++v) {
    for (const Edge& e : nodes_[v].children) transfer(e.to, v) -= e.probability;
  }
  return transfer.fullPivLu().solve(entry);
}

PolicyGraph linear_graph(int stages) {
  if (stages < 1) throw GraphError("linear graph needs at least one stage");
  PolicyGraph g;
  for (int t = 0; t < stages; ++t) g.add_node("stage_" + std::to_string(t + 1), t);
  g.add_root_edge(0, 1.0);
  for (int t = 0; t + 1 < stages; ++t) g.add_edge(t, t + 1, 1.0);
  return g;
}

PolicyGraph cyclic_graph(int stages, double rho) {
  if (stages < 1) throw GraphError("cyclic graph needs at least one stage");
  if (!(rho > 0.0 && rho < 1.0)) throw GraphError("cyclic graph discount must lie in (0, 1)");
  PolicyGraph g;
  for (int t = 0; t < stages; ++t) g.add_node("stage_" + std::to_string(t + 1), t);
  g.add_root_edge(0, 1.0);
  for (int t = 0; t < stages; ++t) g.add_edge(t, (t + 1) % stages, rho);
  return g;
}

PolicyGraph with_investment_root(const PolicyGraph& graph, const InvestmentSpec& spec,
                                 int stage_template) {
  spec.validate();
  if (graph.investment_node()) throw GraphError("graph already has an investment root");
  if (graph.root_edges().empty()) throw GraphError("graph has no entry node");
  if (stage_template < 0) {
    stage_template = 0;
    for (const GraphNode& n : graph.nodes()) stage_template = std::max(stage_template, n.stage_template + 1);
  }
  PolicyGraph out;
  for (const GraphNode& n : graph.nodes()) out.add_node(n.name, n.stage_template, n.noise);
  for (int v = 0; v < graph.num_nodes(); ++v) {
    for (const Edge& e : graph.node(v).children) out.add_edge(v, e.to, e.probability);
  }
  const int inv = out.add_node("investment", stage_template);
  for (const Edge& e : graph.root_edges()) out.add_edge(inv, e.to, e.probability);
  out.add_root_edge(inv, 1.0);
  out.mark_investment_node(inv);
  return out;
}

double stage_discount(double annual_discount, int stages_per_year) {
  if (!(annual_discount > 0.0 && annual_discount < 1.0)) {
    throw GraphError("annual discount must lie in (0, 1)");
  }
  if (stages_per_year < 1) throw GraphError("stages per year must be positive");
  return std::pow(annual_discount, 1.0 / stages_per_year);
}

}  // namespace hydrosddp
