#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relcomp/mixed_radix.hpp"

namespace relcomp {

/// Incremental evaluator of one rule: parents are set one at a time and
/// the child distribution is read back. States here are 0-based.
class RuleCursor {
 public:
  virtual ~RuleCursor() = default;
  virtual void set(std::size_t position, std::uint32_t state0) = 0;
  virtual double probability(std::uint32_t child0) const = 0;
};

/// One explicitly stated condition of a state definition.
struct StateClause {
  State state;
  std::string description;
  std::function<bool(std::span<const State>)> holds;
};

/// A deterministic state definition written as per-state conditions, plus
/// an optional "otherwise" state for combinations no clause covers.
struct StateDefinition {
  std::string name;
  std::vector<StateClause> clauses;
  std::optional<State> otherwise;
};

struct DefinitionCheck {
  std::uint64_t combinations = 0;
  std::uint64_t overlaps = 0;  ///< combinations matched by two clauses with different states
  std::uint64_t gaps = 0;      ///< combinations matched by nothing
};

/// Enumerates every parent combination of `def`.
DefinitionCheck check_definition(const StateDefinition& def, const RadixVector& parents);

class CompositeDag;

/// Node probability rule Pr(child | parents), the function Psi of the model.
/// Copies share the underlying tables.
class Rule {
 public:
  enum class Kind { kTable, kDeterministic, kComposite };

  /// Row-major CPT: row r (0-based parent combination, rightmost parent
  /// fastest) holds child_states probabilities. Rows must sum to 1 +- 1e-12.
  static Rule table(RadixVector parents, std::uint32_t child_states,
                    std::vector<double> rows, std::string name = "table");

  /// Tabulates a deterministic function of 1-based parent states.
  static Rule deterministic(RadixVector parents, std::uint32_t child_states,
                            const std::function<State(std::span<const State>)>& fn,
                            std::string name);

  /// Compiles a state definition; throws ModelError on overlaps or gaps.
  static Rule from_definition(RadixVector parents, std::uint32_t child_states,
                              const StateDefinition& def);

  /// Deterministic rule evaluated through a sub-network of deterministic rules.
  static Rule composite(std::shared_ptr<const CompositeDag> dag, std::string name);

  Kind kind() const noexcept;
  bool is_deterministic() const noexcept { return kind() != Kind::kTable; }
  const RadixVector& parents() const noexcept;
  std::uint32_t child_states() const noexcept;
  const std::string& name() const noexcept;

  /// Child distribution for 1-based parent states. Throws ModelError on an
  /// arity mismatch, DomainError on an out-of-range state.
  std::vector<double> evaluate(std::span<const State> parent_states) const;

  /// Child state of a deterministic rule.
  State deterministic_state(std::span<const State> parent_states) const;

  /// Pr(child | parents) addressed by 0-based parent row (table and
  /// deterministic kinds only).
  double probability(std::uint64_t parent_row0, std::uint32_t child0) const;

  std::unique_ptr<RuleCursor> cursor() const;

  /// 0-based child state per 0-based parent row (deterministic kind only).
  const std::vector<std::uint16_t>& lookup() const;
  const std::vector<double>& table_values() const;
  const CompositeDag& dag() const;

 private:
  struct Impl;
  explicit Rule(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  void check_parent_states(std::span<const State> parent_states) const;

  std::shared_ptr<const Impl> impl_;
};

/// A deterministic function of `inputs` computed by a topologically ordered
/// list of deterministic units. Value slots 0..inputs-1 hold the inputs,
/// slot inputs+u holds unit u. The last unit is the output.
class CompositeDag {
 public:
  struct Unit {
    std::string name;
    std::vector<std::size_t> sources;  ///< value slots feeding the unit's rule
    Rule rule;
  };

  CompositeDag(RadixVector inputs, std::vector<Unit> units);

  const RadixVector& inputs() const noexcept { return inputs_; }
  const std::vector<Unit>& units() const noexcept { return units_; }
  std::uint32_t output_states() const { return units_.back().rule.child_states(); }

  /// 1-based output state for 1-based input states.
  State evaluate(std::span<const State> inputs) const;

  /// Units (indices) depending on input i, in topological order.
  const std::vector<std::size_t>& dependents(std::size_t input) const {
    return dependents_.at(input);
  }

 private:
  RadixVector inputs_;
  std::vector<Unit> units_;
  std::vector<std::vector<std::size_t>> dependents_;
};

}  // namespace relcomp
