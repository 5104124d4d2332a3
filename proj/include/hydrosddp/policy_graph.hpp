#ifndef HYDROSDDP_POLICY_GRAPH_HPP
#define HYDROSDDP_POLICY_GRAPH_HPP

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hydrosddp {

struct InvestmentSpec;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NoiseOutcome {
  Eigen::VectorXd payload;
  double probability = 1.0;
};

/// Finite distribution of noise payloads attached to a node.
class NoiseDistribution {
 public:
  /// Single empty payload with probability one.
  NoiseDistribution();
  explicit NoiseDistribution(std::vector<NoiseOutcome> outcomes);

  static NoiseDistribution deterministic(Eigen::VectorXd payload = Eigen::VectorXd());
  static NoiseDistribution uniform(const std::vector<Eigen::VectorXd>& payloads);

  int size() const { return static_cast<int>(outcomes_.size()); }
  const NoiseOutcome& operator[](int k) const { return outcomes_[k]; }
  const std::vector<NoiseOutcome>& outcomes() const { return outcomes_; }
  Eigen::Index payload_size() const { return outcomes_.front().payload.size(); }

 private:
  std::vector<NoiseOutcome> outcomes_;
};

struct Edge {
  int to = -1;
  double probability = 1.0;
};

struct GraphNode {
  std::string name;
  int stage_template = 0;
  NoiseDistribution noise;
  std::vector<Edge> children;
};

/// Decision-process skeleton. Edges out of a node may sum to less than one;
/// the deficit is the probability that the process terminates there.
class PolicyGraph {
 public:
  int add_node(std::string name, int stage_template, NoiseDistribution noise = {});
  void add_root_edge(int to, double probability);
  void add_edge(int from, int to, double probability);
  void set_noise(int node, NoiseDistribution noise);
  void mark_investment_node(int node);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const GraphNode& node(int id) const { return nodes_.at(id); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& root_edges() const { return root_edges_; }
  std::optional<int> investment_node() const { return investment_node_; }

  /// Throws GraphError on a bad probability, an unreachable node, a cycle of
  /// probability-one edges, or a node from which termination is unreachable.
  void validate() const;

  /// Expected number of visits of each node, from (I - P') v = r.
  Eigen::VectorXd expected_visits() const;
  double expected_trajectory_length() const { return expected_visits().sum(); }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<Edge> root_edges_;
  std::optional<int> investment_node_;
};

/// Chain of T nodes with probability-one edges; node t uses stage template t.
PolicyGraph linear_graph(int stages);

/// T-node cycle where every edge, including T -> 1, has probability rho.
PolicyGraph cyclic_graph(int stages, double rho);

/// Prepends a deterministic investment node with a probability-one edge into
/// the former entry node(s). The new node uses `stage_template`, or the next
/// unused template index when negative.
PolicyGraph with_investment_root(const PolicyGraph& graph, const InvestmentSpec& spec,
                                 int stage_template = -1);

/// Weekly discount from an annual one: beta^(1 / stages_per_year).
double stage_discount(double annual_discount, int stages_per_year);

}  // namespace hydrosddp

#endif  // HYDROSDDP_POLICY_GRAPH_HPP
