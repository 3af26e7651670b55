#include "relcomp/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relcomp/error.hpp"

namespace relcomp {

double Distribution::sum() const noexcept {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double Distribution::at(std::span<const State> states) const {
  return values.at(states_to_row(states, radices) - 1);
}

void Distribution::check_normalized(double tol, const std::string& what) const {
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw NumericError(what + " has a negative or non-finite entry");
    }
  }
  const double s = sum();
  if (std::abs(s - 1.0) > tol) throw NumericError(what + " sums to " + std::to_string(s));
}

std::vector<StructureViolation> validate_structure(const SystemModel& model) {
  std::vector<StructureViolation> out;
  const auto leaves = model.leaves();
  if (leaves.size() != 1) {
    std::string names;
    for (NodeId l : leaves) names += (names.empty() ? "" : ", ") + model.node(l).name;
    out.push_back({1, "expected one leaf node, found " + std::to_string(leaves.size()) +
                          (names.empty() ? "" : " (" + names + ")")});
    return out;
  }
  const NodeId s = leaves.front();
  std::vector<bool> leaf_parent(model.size(), false);
  for (NodeId p : model.parents(s)) leaf_parent[p] = true;
  for (NodeId c : model.parents(s)) {
    for (NodeId p : model.parents(c)) {
      if (!model.is_root(p)) {
        out.push_back({2, "parent '" + model.node(p).name + "' of '" + model.node(c).name +
                              "' is not a root node"});
      }
    }
  }
  for (NodeId v = 0; v < model.size(); ++v) {
    for (NodeId u : model.parents(v)) {
      if (leaf_parent[u] && leaf_parent[v]) {
        out.push_back({3, "arc between leaf parents '" + model.node(u).name + "' -> '" +
                              model.node(v).name + "'"});
      } else if (!leaf_parent[v] && v != s) {
        out.push_back({4, "arc between nodes above the leaf's parents '" + model.node(u).name +
                              "' -> '" + model.node(v).name + "'"});
      }
    }
  }
  return out;
}

void require_valid_structure(const SystemModel& model) {
  const auto violations = validate_structure(model);
  if (violations.empty()) return;
  std::string msg = "model violates the block preconditions:";
  for (const auto& v : violations) {
    msg += " [" + std::to_string(v.condition) + "] " + v.message + ";";
  }
  throw ModelError(msg);
}

Partition find_blocks(const SystemModel& model) {
  require_valid_structure(model);
  const NodeId s = model.leaf();
  std::vector<NodeId> leaf_parents = model.parents(s);
  std::sort(leaf_parents.begin(), leaf_parents.end());
  Partition part;
  std::vector<NodeId> children;
  for (NodeId c : leaf_parents) {
    (model.is_root(c) ? part.independent_nodes : children).push_back(c);
  }
  // Union-find over children via their root parents.
  std::vector<std::size_t> parent(children.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<std::ptrdiff_t> owner(model.size(), -1);
  for (std::size_t i = 0; i < children.size(); ++i) {
    for (NodeId r : model.parents(children[i])) {
      if (owner[r] < 0) {
        owner[r] = static_cast<std::ptrdiff_t>(i);
      } else {
        const std::size_t a = find(i), b = find(static_cast<std::size_t>(owner[r]));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::ptrdiff_t> block_of(children.size(), -1);
  for (std::size_t i = 0; i < children.size(); ++i) {
    const std::size_t rep = find(i);
    if (block_of[rep] < 0) {
      block_of[rep] = static_cast<std::ptrdiff_t>(part.blocks.size());
      part.blocks.emplace_back();
    }
    part.blocks[static_cast<std::size_t>(block_of[rep])].children.push_back(children[i]);
  }
  for (Block& b : part.blocks) {
    std::vector<std::uint32_t> radices;
    std::vector<NodeId> roots;
    for (NodeId c : b.children) {
      radices.push_back(model.states(c));
      for (NodeId r : model.parents(c)) roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    b.roots = std::move(roots);
    b.child_radices = RadixVector(radices);
  }
  return part;
}

BlockCounts block_state_counts(const Block& block, const SystemModel& model) {
  std::uint64_t child_total = 1;
  for (NodeId c : block.children) {
    if (__builtin_mul_overflow(child_total, std::uint64_t{model.states(c)}, &child_total)) {
      throw ModelError("block child state count overflows");
    }
  }
  std::uint64_t total = child_total;
  for (NodeId r : block.roots) {
    if (__builtin_mul_overflow(total, std::uint64_t{model.states(r)}, &total)) {
      throw ModelError("block state count overflows");
    }
  }
  return {total, child_total};
}

std::string block_name(const Block& block, const SystemModel& model) {
  std::string name = "[";
  for (std::size_t i = 0; i < block.children.size(); ++i) {
    name += (i ? "," : "") + model.node(block.children[i]).name;
  }
  return name + "]";
}

EquivalentNode equivalent_node(const Block& block, const SystemModel& model,
                               const std::vector<double>& joint) {
  const BlockCounts counts = block_state_counts(block, model);
  if (joint.size() != counts.child_total) {
    throw DomainError("block joint has " + std::to_string(joint.size()) + " entries, expected " +
                      std::to_string(counts.child_total));
  }
  if (counts.child_total > std::numeric_limits<std::uint32_t>::max()) {
    throw ModelError("equivalent node of " + block_name(block, model) + " has too many states");
  }
  Distribution d{{}, block.child_radices, joint};
  d.check_normalized(1e-9, "joint of block " + block_name(block, model));
  EquivalentNode eq;
  eq.node = Node{0, block.children.size() == 1 ? model.node(block.children[0]).name : block_name(block, model),
                 static_cast<std::uint32_t>(counts.child_total)};
  eq.members = block.children;
  eq.decode = block.child_radices;
  eq.marginal = joint;
  return eq;
}

}  // namespace relcomp
