#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relcomp/lifetime.hpp"
#include "relcomp/mixed_radix.hpp"
#include "relcomp/rule.hpp"

namespace relcomp {

using NodeId = std::size_t;

struct Node {
  NodeId id;
  std::string name;
  std::uint32_t state_count;
};

/// A shared factor raising the failure probability of several children.
struct CommonCause {
  NodeId factor;
  std::vector<NodeId> affected;
};

/// Immutable Bayesian network over multistate nodes. Node ids are
/// declaration indices. Copies share rules.
class SystemModel {
 public:
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::uint32_t states(NodeId id) const { return nodes_.at(id).state_count; }

  std::optional<NodeId> find(const std::string& name) const;
  /// Throws DomainError naming the node when it does not exist.
  NodeId id_of(const std::string& name) const;

  bool is_root(NodeId id) const { return !rules_.at(id).has_value(); }
  const std::vector<NodeId>& parents(NodeId id) const { return parents_.at(id); }
  const std::vector<NodeId>& children(NodeId id) const { return children_.at(id); }
  std::vector<NodeId> roots() const;
  std::vector<NodeId> leaves() const;
  /// The unique leaf; ModelError when there is not exactly one.
  NodeId leaf() const;
  /// Parents before children, ties in declaration order.
  const std::vector<NodeId>& topological_order() const noexcept { return topo_; }

  const Rule& rule(NodeId id) const;
  const std::vector<double>& marginal(NodeId id) const;
  const std::optional<LifetimeDistribution>& law(NodeId id) const { return laws_.at(id); }
  const std::vector<CommonCause>& common_causes() const noexcept { return common_causes_; }

  const std::optional<TimeGrid>& time_grid() const noexcept { return time_grid_; }
  /// Lowest leaf state counted as "reliable" by curve analyses.
  std::optional<State> reliability_min_state() const noexcept { return min_state_; }

  /// Copy with every law-backed root marginal set to [F(t), 1 - F(t)].
  SystemModel at_time(double t) const;
  /// Copy with one root marginal replaced (validated).
  SystemModel with_marginal(NodeId root, std::vector<double> marginal) const;

  /// Number of states of the full joint, saturating at UINT64_MAX.
  std::uint64_t joint_size() const noexcept;

 private:
  friend class ModelBuilder;

  std::vector<Node> nodes_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::optional<Rule>> rules_;
  std::vector<std::vector<double>> marginals_;
  std::vector<std::optional<LifetimeDistribution>> laws_;
  std::vector<CommonCause> common_causes_;
  std::vector<NodeId> topo_;
  std::optional<TimeGrid> time_grid_;
  std::optional<State> min_state_;
};

/// Throws ModelError unless `p` is a non-negative finite vector of length
/// `states` summing to 1 within 1e-12.
void check_marginal(const std::vector<double>& p, std::uint32_t states, const std::string& node);

class ModelBuilder {
 public:
  NodeId add_node(const std::string& name, std::uint32_t state_count);
  /// Declares the parents of `child` and its rule. The rule's parent radices
  /// must match the parents' state counts.
  ModelBuilder& set_rule(NodeId child, std::vector<NodeId> parents, Rule rule);
  ModelBuilder& set_marginal(NodeId root, std::vector<double> marginal);
  /// Two-state roots only. Marginal defaults to the law at t = 0.
  ModelBuilder& set_law(NodeId root, LifetimeDistribution law);
  ModelBuilder& add_common_cause(NodeId factor, std::vector<NodeId> affected);
  ModelBuilder& set_time_grid(TimeGrid grid);
  ModelBuilder& set_reliability_min_state(State s);

  std::optional<NodeId> find(const std::string& name) const;
  std::uint32_t states(NodeId id) const { return model_.nodes_.at(id).state_count; }

  /// Validates acyclicity, rule/parent agreement and marginals. Does not
  /// require a unique leaf; see validate_structure.
  SystemModel build() const;

 private:
  SystemModel model_;
};

}  // namespace relcomp
