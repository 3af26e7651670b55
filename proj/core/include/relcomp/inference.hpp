#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "relcomp/blocks.hpp"
#include "relcomp/distribution.hpp"
#include "relcomp/model.hpp"
#include "relcomp/reduce.hpp"

namespace relcomp {

using Assignment = std::vector<std::pair<NodeId, State>>;

/// Q (node = state targets) and E (observed states).
struct QuerySpec {
  Assignment query;
  Assignment evidence;
};

/// Parses "A=1,B=2" against the model's node names. Throws DomainError for
/// unknown names or out-of-range states.
Assignment parse_assignment(const SystemModel& model, const std::string& text);

enum class InferenceMode { kMultilevel, kFlat };

struct InferenceOptions {
  InferenceMode mode = InferenceMode::kMultilevel;
  ReduceOptions reduce;
  /// Answer through the extended-query path even when Q holds no block
  /// children (a consistency check; same result in exact arithmetic).
  bool force_extended_query = false;
};

struct InferenceResult {
  Distribution distribution;  ///< Pr(S | Q, E) over the leaf
  int situation = 1;          ///< 1: Q empty, 2: no block child in Q, 3: otherwise
  double mass = 1.0;          ///< total before the final normalization
  ReduceStats largest;        ///< statistics of the largest table reduction
};

/// Joint distribution of a block's children.
Distribution block_joint(const Block& block, const SystemModel& model,
                         const ReduceOptions& options = {}, ReduceStats* stats = nullptr);

/// An input of the leaf rule as seen by independent inference: either a
/// single parent or an equivalent node standing for several parents.
struct Slot {
  std::string label;
  std::vector<double> marginal;
  std::vector<std::size_t> members;  ///< rule parent positions, decode order
  RadixVector decode;                ///< member radices
};

/// Pr(S | Q) for mutually independent slots.
struct ConditionalTable {
  std::vector<std::size_t> query_slots;
  RadixVector radices;  ///< [query slot radices..., leaf states]
  std::vector<double> values;
};

/// Builds the leaf table over [Q..., S, rest...] and sums out the rest
/// weighted by their marginals.
ConditionalTable independent_infer(const Rule& leaf_rule, const std::vector<Slot>& slots,
                                   const std::vector<std::size_t>& query_slots,
                                   const ReduceOptions& options = {}, ReduceStats* stats = nullptr);

/// Single-level inference with block decomposition. The model must satisfy
/// validate_structure.
InferenceResult dependent_infer(const SystemModel& model, const QuerySpec& spec,
                                const InferenceOptions& options = {});

/// Keeps the labelled nodes (in the given order), summing out the rest.
Distribution marginalize_keep(const Distribution& d, const std::vector<std::string>& keep);

/// Entry point. Multilevel runs level by level; flat composes every
/// intermediate rule into one leaf rule first.
InferenceResult infer(const SystemModel& model, const QuerySpec& spec,
                      const InferenceOptions& options = {});

/// Single-level model whose leaf rule composes every intermediate rule.
SystemModel flatten(const SystemModel& model);

/// Frontier of flatten(): first-level nodes and roots feeding deeper nodes.
std::vector<NodeId> flat_frontier(const SystemModel& model);

}  // namespace relcomp
