#include "relcomp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "relcomp/error.hpp"

namespace relcomp {

void check_marginal(const std::vector<double>& p, std::uint32_t states, const std::string& node) {
  if (p.size() != states) {
    throw ModelError("marginal of '" + node + "' has " + std::to_string(p.size()) +
                     " entries, node has " + std::to_string(states) + " states");
  }
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) {
      throw ModelError("marginal of '" + node + "' has a negative or non-finite entry");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ModelError("marginal of '" + node + "' sums to " + std::to_string(sum));
  }
}

std::optional<NodeId> SystemModel::find(const std::string& name) const {
  for (const auto& n : nodes_) {
    if (n.name == name) return n.id;
  }
  return std::nullopt;
}

NodeId SystemModel::id_of(const std::string& name) const {
  if (auto id = find(name)) return *id;
  throw DomainError("unknown node '" + name + "'");
}

std::vector<NodeId> SystemModel::roots() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < size(); ++i) {
    if (is_root(i)) out.push_back(i);
  }
  return out;
}

std::vector<NodeId> SystemModel::leaves() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < size(); ++i) {
    if (children_[i].empty()) out.push_back(i);
  }
  return out;
}

NodeId SystemModel::leaf() const {
  auto l = leaves();
  if (l.size() != 1) {
    throw ModelError("model has " + std::to_string(l.size()) + " leaf nodes, expected 1");
  }
  return l.front();
}

const Rule& SystemModel::rule(NodeId id) const {
  const auto& r = rules_.at(id);
  if (!r) throw ModelError("node '" + nodes_[id].name + "' is a root and has no rule");
  return *r;
}

const std::vector<double>& SystemModel::marginal(NodeId id) const {
  if (!is_root(id)) throw ModelError("node '" + nodes_[id].name + "' is not a root");
  return marginals_.at(id);
}

SystemModel SystemModel::at_time(double t) const {
  SystemModel copy = *this;
  for (NodeId i = 0; i < size(); ++i) {
    if (laws_[i]) {
      const double f = failure_probability(*laws_[i], t);
      copy.marginals_[i] = {f, 1.0 - f};
    }
  }
  return copy;
}

SystemModel SystemModel::with_marginal(NodeId root, std::vector<double> marginal) const {
  if (root >= size() || !is_root(root)) throw DomainError("with_marginal: not a root node");
  check_marginal(marginal, nodes_[root].state_count, nodes_[root].name);
  SystemModel copy = *this;
  copy.marginals_[root] = std::move(marginal);
  copy.laws_[root].reset();
  return copy;
}

std::uint64_t SystemModel::joint_size() const noexcept {
  std::uint64_t total = 1;
  for (const auto& n : nodes_) {
    if (__builtin_mul_overflow(total, std::uint64_t{n.state_count}, &total)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return total;
}

NodeId ModelBuilder::add_node(const std::string& name, std::uint32_t state_count) {
  if (name.empty()) throw ModelError("node name must not be empty");
  if (find(name)) throw ModelError("duplicate node '" + name + "'");
  if (state_count < 2) {
    throw ModelError("node '" + name + "' needs at least 2 states");
  }
  const NodeId id = model_.nodes_.size();
  model_.nodes_.push_back(Node{id, name, state_count});
  model_.parents_.emplace_back();
  model_.children_.emplace_back();
  model_.rules_.emplace_back();
  model_.marginals_.emplace_back();
  model_.laws_.emplace_back();
  return id;
}

ModelBuilder& ModelBuilder::set_rule(NodeId child, std::vector<NodeId> parents, Rule rule) {
  const auto& nodes = model_.nodes_;
  if (child >= nodes.size()) throw ModelError("set_rule: unknown child id");
  const std::string& name = nodes[child].name;
  if (model_.rules_[child]) throw ModelError("node '" + name + "' already has a rule");
  if (!model_.marginals_[child].empty() || model_.laws_[child]) {
    throw ModelError("node '" + name + "' has a marginal and cannot have a rule");
  }
  if (parents.empty()) throw ModelError("rule of '" + name + "' has no parents");
  if (rule.parents().size() != parents.size()) {
    throw ModelError("rule of '" + name + "' expects " + std::to_string(rule.parents().size()) +
                     " parents, " + std::to_string(parents.size()) + " given");
  }
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const NodeId p = parents[i];
    if (p >= nodes.size()) throw ModelError("rule of '" + name + "' has an unknown parent");
    if (p == child) throw ModelError("node '" + name + "' is its own parent");
    for (std::size_t j = 0; j < i; ++j) {
      if (parents[j] == p) throw ModelError("rule of '" + name + "' repeats a parent");
    }
    if (rule.parents().radix(i) != nodes[p].state_count) {
      throw ModelError("rule of '" + name + "': parent '" + nodes[p].name + "' has " +
                       std::to_string(nodes[p].state_count) + " states, rule expects " +
                       std::to_string(rule.parents().radix(i)));
    }
  }
  if (rule.child_states() != nodes[child].state_count) {
    throw ModelError("rule of '" + name + "' emits " + std::to_string(rule.child_states()) +
                     " states, node has " + std::to_string(nodes[child].state_count));
  }
  for (NodeId p : parents) model_.children_[p].push_back(child);
  model_.parents_[child] = std::move(parents);
  model_.rules_[child] = std::move(rule);
  return *this;
}

ModelBuilder& ModelBuilder::set_marginal(NodeId root, std::vector<double> marginal) {
  if (root >= model_.nodes_.size()) throw ModelError("set_marginal: unknown node id");
  const Node& n = model_.nodes_[root];
  if (model_.rules_[root]) throw ModelError("node '" + n.name + "' has a rule");
  check_marginal(marginal, n.state_count, n.name);
  model_.marginals_[root] = std::move(marginal);
  return *this;
}

ModelBuilder& ModelBuilder::set_law(NodeId root, LifetimeDistribution law) {
  if (root >= model_.nodes_.size()) throw ModelError("set_law: unknown node id");
  const Node& n = model_.nodes_[root];
  if (model_.rules_[root]) throw ModelError("node '" + n.name + "' has a rule");
  if (n.state_count != 2) {
    throw ModelError("lifetime law on '" + n.name + "' needs a 2-state node");
  }
  model_.laws_[root] = law;
  if (model_.marginals_[root].empty()) model_.marginals_[root] = {0.0, 1.0};
  return *this;
}

ModelBuilder& ModelBuilder::add_common_cause(NodeId factor, std::vector<NodeId> affected) {
  if (factor >= model_.nodes_.size()) throw ModelError("add_common_cause: unknown factor");
  for (NodeId a : affected) {
    if (a >= model_.nodes_.size()) throw ModelError("add_common_cause: unknown node");
  }
  model_.common_causes_.push_back(CommonCause{factor, std::move(affected)});
  return *this;
}

ModelBuilder& ModelBuilder::set_time_grid(TimeGrid grid) {
  grid.validate();
  model_.time_grid_ = grid;
  return *this;
}

ModelBuilder& ModelBuilder::set_reliability_min_state(State s) {
  if (s < 1) throw ModelError("reliability min_state must be >= 1");
  model_.min_state_ = s;
  return *this;
}

std::optional<NodeId> ModelBuilder::find(const std::string& name) const { return model_.find(name); }

SystemModel ModelBuilder::build() const {
  SystemModel m = model_;
  const std::size_t n = m.size();
  if (n == 0) throw ModelError("model has no nodes");
  for (NodeId i = 0; i < n; ++i) {
    if (!m.rules_[i] && m.marginals_[i].empty()) {
      throw ModelError("root '" + m.nodes_[i].name + "' has neither a marginal nor a law");
    }
  }
  // Kahn's algorithm; the priority queue keeps ties in declaration order.
  std::vector<std::size_t> indegree(n);
  for (NodeId i = 0; i < n; ++i) indegree[i] = m.parents_[i].size();
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    m.topo_.push_back(v);
    for (NodeId c : m.children_[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (m.topo_.size() != n) throw ModelError("model graph has a cycle");
  for (const auto& cc : m.common_causes_) {
    if (!m.is_root(cc.factor)) {
      throw ModelError("common cause '" + m.nodes_[cc.factor].name + "' must be a root");
    }
    for (NodeId a : cc.affected) {
      const auto& ps = m.parents_[a];
      if (std::find(ps.begin(), ps.end(), cc.factor) == ps.end()) {
        throw ModelError("common cause '" + m.nodes_[cc.factor].name + "' is not a parent of '" +
                         m.nodes_[a].name + "'");
      }
    }
  }
  if (m.min_state_) {
    auto leaves = m.leaves();
    for (NodeId l : leaves) {
      if (*m.min_state_ > m.nodes_[l].state_count) {
        throw ModelError("reliability min_state exceeds the state count of '" +
                         m.nodes_[l].name + "'");
      }
    }
  }
  return m;
}

}  // namespace relcomp
