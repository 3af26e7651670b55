#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relcomp/rule.hpp"

namespace relcomp {

using RuleParams = std::map<std::string, double>;

/// Builds a named rule. Generic builders:
///   copy              one parent, child = parent
///   k_of_n (k)        2-state child, working iff >= k parents at their top state
///   series, parallel  child = min / max of parent states (all radices = child)
///   hot_standby, cold_standby
///                     (basic, optional) pair; 2-state child works iff either
///                     works; 3-state child: 3 basic works, 2 only optional, 1 none
///   downgrade_ladder  child = 1 + number of working parents (child = n + 1)
///   pitch_axis        (SM, DF, HR) -> SM if DF and HR work, else 1
/// plus the satellite attitude-control definitions listed by
/// builtin_rule_names(). Throws ModelError when the parent radices or child
/// state count do not fit the builder, DomainError for an unknown name.
Rule make_builtin_rule(const std::string& builder, const RadixVector& parents,
                       std::uint32_t child_states, const RuleParams& params = {});

/// The clause form of a definition-backed builder, if it has one.
std::optional<StateDefinition> builtin_definition(const std::string& builder);

/// Fixed parent radices and child state count of a definition-backed
/// builder.
struct BuiltinShape {
  std::vector<std::uint32_t> parents;
  std::uint32_t child_states;
};
std::optional<BuiltinShape> builtin_shape(const std::string& builder);

const std::vector<std::string>& builtin_rule_names();

}  // namespace relcomp
