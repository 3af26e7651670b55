#pragma once

#include <cstdint>
#include <vector>

#include "relcomp/distribution.hpp"
#include "relcomp/inference.hpp"
#include "relcomp/model.hpp"

namespace relcomp {

inline constexpr std::uint64_t kOracleLimit = 10'000'000;

/// Full joint over all nodes in declaration order.
struct DenseJoint {
  RadixVector radices;
  std::vector<double> values;
};

/// Chain-rule product over every state combination. Throws ModelError when
/// the joint exceeds kOracleLimit entries.
DenseJoint enumerate_joint(const SystemModel& model);

/// Pr(target | conditions) by direct summation. Throws
/// UndefinedConditionalError when the conditioning event has probability 0.
Distribution oracle_conditional(const DenseJoint& joint, const SystemModel& model, NodeId target,
                                const Assignment& conditions);

/// Enumeration answer to the same question dependent_infer answers.
Distribution oracle_infer(const SystemModel& model, const QuerySpec& spec);

struct MonteCarloResult {
  std::vector<double> estimate;   ///< leaf state frequencies
  std::vector<double> std_error;  ///< sqrt(p (1 - p) / n)
  std::uint64_t samples = 0;
};

/// Forward sampling of the leaf. The sample count is split over 64 fixed
/// shards with seeds derived from `seed`, so the result does not depend on
/// `threads`.
MonteCarloResult monte_carlo(const SystemModel& model, std::uint64_t samples, std::uint64_t seed,
                             unsigned threads = 1);

}  // namespace relcomp
