#pragma once

#include <string>
#include <vector>

#include "relcomp/distribution.hpp"
#include "relcomp/model.hpp"

namespace relcomp {

/// A violated structural precondition. `condition` is 1: unique leaf,
/// 2: parents of the leaf's parents are roots, 3: no arcs among the leaf's
/// parents, 4: no arcs among nodes above the leaf's parents.
struct StructureViolation {
  int condition;
  std::string message;
};

std::vector<StructureViolation> validate_structure(const SystemModel& model);
/// Throws ModelError listing the violations, if any.
void require_valid_structure(const SystemModel& model);

/// Dependent children of the leaf and their shared root parents, both in
/// declaration order.
struct Block {
  std::vector<NodeId> roots;
  std::vector<NodeId> children;
  RadixVector child_radices;
};

struct Partition {
  std::vector<Block> blocks;
  std::vector<NodeId> independent_nodes;  ///< root parents of the leaf
};

/// Connected components of the "shares a root parent" relation over the
/// leaf's non-root parents. A child sharing no parent forms a block of its
/// own. Blocks are ordered by their first child.
Partition find_blocks(const SystemModel& model);

struct BlockCounts {
  std::uint64_t total;        ///< all root and child state combinations
  std::uint64_t child_total;  ///< child state combinations only
};

/// Throws ModelError on overflow.
BlockCounts block_state_counts(const Block& block, const SystemModel& model);

/// One-node stand-in for a block: its state k decodes (rightmost child
/// fastest) to a child state combination.
struct EquivalentNode {
  Node node;
  std::vector<NodeId> members;
  RadixVector decode;
  std::vector<double> marginal;

  std::vector<State> member_states(State k) const { return row_to_states(k, decode); }
};

/// Throws NumericError unless `joint` is normalized within 1e-9.
EquivalentNode equivalent_node(const Block& block, const SystemModel& model,
                               const std::vector<double>& joint);

std::string block_name(const Block& block, const SystemModel& model);

}  // namespace relcomp
