#include "relcomp/rule.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "relcomp/error.hpp"

namespace relcomp {

struct Rule::Impl {
  Kind kind;
  RadixVector parents;
  std::uint32_t child_states;
  std::string name;
  std::vector<double> table;           // kTable
  std::vector<std::uint16_t> lookup;   // kDeterministic
  std::shared_ptr<const CompositeDag> dag;  // kComposite
};

namespace {

constexpr std::uint64_t kMaxTabulated = std::uint64_t{1} << 26;

void check_child_states(std::uint32_t child_states) {
  if (child_states < 2 || child_states > std::numeric_limits<std::uint16_t>::max()) {
    throw ModelError("child state count " + std::to_string(child_states) +
                     " outside 2..65535");
  }
}

void check_tabulable(const RadixVector& parents, const std::string& name) {
  if (parents.empty()) throw ModelError("rule '" + name + "' has no parents");
  if (parents.total() > kMaxTabulated) {
    throw ModelError("rule '" + name + "' has " + std::to_string(parents.total()) +
                     " parent combinations; too many to tabulate");
  }
}

class TableCursor final : public RuleCursor {
 public:
  explicit TableCursor(const Rule& rule)
      : values_(rule.table_values().data()),
        child_states_(rule.child_states()),
        strides_(rule.parents().size()),
        states_(rule.parents().size(), 0) {
    for (std::size_t i = 0; i < strides_.size(); ++i) strides_[i] = rule.parents().stride(i);
  }
  void set(std::size_t position, std::uint32_t state0) override {
    row_ += (static_cast<std::int64_t>(state0) - states_[position]) *
            static_cast<std::int64_t>(strides_[position]);
    states_[position] = state0;
  }
  double probability(std::uint32_t child0) const override {
    return values_[static_cast<std::uint64_t>(row_) * child_states_ + child0];
  }

 private:
  const double* values_;
  std::uint32_t child_states_;
  std::vector<std::uint64_t> strides_;
  std::vector<std::uint32_t> states_;
  std::int64_t row_ = 0;
};

class LookupCursor final : public RuleCursor {
 public:
  explicit LookupCursor(const Rule& rule)
      : lookup_(rule.lookup().data()),
        strides_(rule.parents().size()),
        states_(rule.parents().size(), 0) {
    for (std::size_t i = 0; i < strides_.size(); ++i) strides_[i] = rule.parents().stride(i);
  }
  void set(std::size_t position, std::uint32_t state0) override {
    row_ += (static_cast<std::int64_t>(state0) - states_[position]) *
            static_cast<std::int64_t>(strides_[position]);
    states_[position] = state0;
  }
  double probability(std::uint32_t child0) const override {
    return lookup_[row_] == child0 ? 1.0 : 0.0;
  }

 private:
  const std::uint16_t* lookup_;
  std::vector<std::uint64_t> strides_;
  std::vector<std::uint32_t> states_;
  std::int64_t row_ = 0;
};

class CompositeCursor final : public RuleCursor {
 public:
  explicit CompositeCursor(const CompositeDag& dag) : dag_(dag) {
    const std::size_t n_in = dag.inputs().size();
    values_.assign(n_in + dag.units().size(), 0);
    units_.reserve(dag.units().size());
    for (const auto& unit : dag.units()) {
      CompiledUnit cu;
      cu.lookup = unit.rule.lookup().data();
      for (std::size_t p = 0; p < unit.sources.size(); ++p) {
        cu.sources.push_back(unit.sources[p]);
        cu.strides.push_back(unit.rule.parents().stride(p));
      }
      units_.push_back(std::move(cu));
    }
    for (std::size_t u = 0; u < units_.size(); ++u) recompute(u);
  }
  void set(std::size_t position, std::uint32_t state0) override {
    if (values_[position] == state0) return;
    values_[position] = state0;
    for (std::size_t u : dag_.dependents(position)) recompute(u);
  }
  double probability(std::uint32_t child0) const override {
    return values_.back() == child0 ? 1.0 : 0.0;
  }

 private:
  struct CompiledUnit {
    const std::uint16_t* lookup = nullptr;
    std::vector<std::size_t> sources;
    std::vector<std::uint64_t> strides;
  };
  void recompute(std::size_t u) {
    const CompiledUnit& cu = units_[u];
    std::uint64_t row = 0;
    for (std::size_t p = 0; p < cu.sources.size(); ++p) {
      row += values_[cu.sources[p]] * cu.strides[p];
    }
    values_[dag_.inputs().size() + u] = cu.lookup[row];
  }

  const CompositeDag& dag_;
  std::vector<CompiledUnit> units_;
  std::vector<std::uint32_t> values_;
};

}  // namespace

DefinitionCheck check_definition(const StateDefinition& def, const RadixVector& parents) {
  DefinitionCheck check;
  Odometer odo(parents);
  std::vector<State> states(parents.size());
  for (std::uint64_t row = 0; row < parents.total(); ++row) {
    for (std::size_t i = 0; i < states.size(); ++i) states[i] = odo.digit(i) + 1;
    std::optional<State> matched;
    bool overlap = false;
    for (const auto& clause : def.clauses) {
      if (!clause.holds(states)) continue;
      if (matched && *matched != clause.state) overlap = true;
      matched = clause.state;
    }
    if (overlap) ++check.overlaps;
    if (!matched && !def.otherwise) ++check.gaps;
    ++check.combinations;
    odo.advance();
  }
  return check;
}

Rule Rule::table(RadixVector parents, std::uint32_t child_states, std::vector<double> rows,
                 std::string name) {
  check_child_states(child_states);
  check_tabulable(parents, name);
  const std::uint64_t n_rows = parents.total();
  if (rows.size() != n_rows * child_states) {
    throw ModelError("rule '" + name + "' table has " + std::to_string(rows.size()) +
                     " entries, expected " + std::to_string(n_rows * child_states));
  }
  for (std::uint64_t r = 0; r < n_rows; ++r) {
    double sum = 0.0;
    for (std::uint32_t c = 0; c < child_states; ++c) {
      const double p = rows[r * child_states + c];
      if (!std::isfinite(p) || p < 0.0) {
        throw ModelError("rule '" + name + "' row " + std::to_string(r + 1) +
                         " has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ModelError("rule '" + name + "' row " + std::to_string(r + 1) + " sums to " +
                       std::to_string(sum));
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kTable;
  impl->parents = std::move(parents);
  impl->child_states = child_states;
  impl->name = std::move(name);
  impl->table = std::move(rows);
  return Rule(std::move(impl));
}

Rule Rule::deterministic(RadixVector parents, std::uint32_t child_states,
                         const std::function<State(std::span<const State>)>& fn,
                         std::string name) {
  check_child_states(child_states);
  check_tabulable(parents, name);
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kDeterministic;
  impl->child_states = child_states;
  impl->lookup.resize(parents.total());
  Odometer odo(parents);
  std::vector<State> states(parents.size());
  for (std::uint64_t row = 0; row < parents.total(); ++row) {
    for (std::size_t i = 0; i < states.size(); ++i) states[i] = odo.digit(i) + 1;
    const State s = fn(states);
    if (s < 1 || s > child_states) {
      throw ModelError("rule '" + name + "' maps row " + std::to_string(row + 1) +
                       " to state " + std::to_string(s));
    }
    impl->lookup[row] = static_cast<std::uint16_t>(s - 1);
    odo.advance();
  }
  impl->parents = std::move(parents);
  impl->name = std::move(name);
  return Rule(std::move(impl));
}

Rule Rule::from_definition(RadixVector parents, std::uint32_t child_states,
                           const StateDefinition& def) {
  const DefinitionCheck check = check_definition(def, parents);
  if (check.overlaps > 0 || check.gaps > 0) {
    throw ModelError("state definition '" + def.name + "' has " +
                     std::to_string(check.overlaps) + " overlapping and " +
                     std::to_string(check.gaps) + " uncovered parent combinations");
  }
  return deterministic(
      std::move(parents), child_states,
      [&def](std::span<const State> states) -> State {
        for (const auto& clause : def.clauses) {
          if (clause.holds(states)) return clause.state;
        }
        return *def.otherwise;
      },
      def.name);
}

Rule Rule::composite(std::shared_ptr<const CompositeDag> dag, std::string name) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::kComposite;
  impl->parents = dag->inputs();
  impl->child_states = dag->output_states();
  impl->name = std::move(name);
  impl->dag = std::move(dag);
  return Rule(std::move(impl));
}

Rule::Kind Rule::kind() const noexcept { return impl_->kind; }
const RadixVector& Rule::parents() const noexcept { return impl_->parents; }
std::uint32_t Rule::child_states() const noexcept { return impl_->child_states; }
const std::string& Rule::name() const noexcept { return impl_->name; }

void Rule::check_parent_states(std::span<const State> parent_states) const {
  if (parent_states.size() != impl_->parents.size()) {
    throw ModelError("rule '" + impl_->name + "' expects " +
                     std::to_string(impl_->parents.size()) + " parents, got " +
                     std::to_string(parent_states.size()));
  }
  for (std::size_t i = 0; i < parent_states.size(); ++i) {
    if (parent_states[i] < 1 || parent_states[i] > impl_->parents.radix(i)) {
      throw DomainError("rule '" + impl_->name + "': parent " + std::to_string(i + 1) +
                        " state " + std::to_string(parent_states[i]) + " out of range");
    }
  }
}

std::vector<double> Rule::evaluate(std::span<const State> parent_states) const {
  check_parent_states(parent_states);
  std::vector<double> row(impl_->child_states, 0.0);
  if (impl_->kind == Kind::kTable) {
    const std::uint64_t r = states_to_row(parent_states, impl_->parents) - 1;
    for (std::uint32_t c = 0; c < impl_->child_states; ++c) {
      row[c] = impl_->table[r * impl_->child_states + c];
    }
  } else {
    row[deterministic_state(parent_states) - 1] = 1.0;
  }
  return row;
}

State Rule::deterministic_state(std::span<const State> parent_states) const {
  check_parent_states(parent_states);
  switch (impl_->kind) {
    case Kind::kDeterministic:
      return impl_->lookup[states_to_row(parent_states, impl_->parents) - 1] + 1;
    case Kind::kComposite:
      return impl_->dag->evaluate(parent_states);
    case Kind::kTable:
      break;
  }
  throw ModelError("rule '" + impl_->name + "' is not deterministic");
}

double Rule::probability(std::uint64_t parent_row0, std::uint32_t child0) const {
  switch (impl_->kind) {
    case Kind::kTable:
      return impl_->table[parent_row0 * impl_->child_states + child0];
    case Kind::kDeterministic:
      return impl_->lookup[parent_row0] == child0 ? 1.0 : 0.0;
    case Kind::kComposite:
      break;
  }
  throw ModelError("composite rule '" + impl_->name + "' has no row addressing");
}

std::unique_ptr<RuleCursor> Rule::cursor() const {
  switch (impl_->kind) {
    case Kind::kTable:
      return std::make_unique<TableCursor>(*this);
    case Kind::kDeterministic:
      return std::make_unique<LookupCursor>(*this);
    case Kind::kComposite:
      return std::make_unique<CompositeCursor>(*impl_->dag);
  }
  return nullptr;
}

const std::vector<std::uint16_t>& Rule::lookup() const {
  if (impl_->kind != Kind::kDeterministic) {
    throw ModelError("rule '" + impl_->name + "' has no lookup table");
  }
  return impl_->lookup;
}

const std::vector<double>& Rule::table_values() const {
  if (impl_->kind != Kind::kTable) throw ModelError("rule '" + impl_->name + "' is not a CPT");
  return impl_->table;
}

const CompositeDag& Rule::dag() const {
  if (impl_->kind != Kind::kComposite) {
    throw ModelError("rule '" + impl_->name + "' is not composite");
  }
  return *impl_->dag;
}

CompositeDag::CompositeDag(RadixVector inputs, std::vector<Unit> units)
    : inputs_(std::move(inputs)), units_(std::move(units)), dependents_(inputs_.size()) {
  if (units_.empty()) throw ModelError("composite rule needs at least one unit");
  const std::size_t n_in = inputs_.size();
  // reach[slot] = set of units downstream of the slot
  std::vector<std::vector<bool>> reach(n_in, std::vector<bool>(units_.size(), false));
  std::vector<std::vector<bool>> unit_reach(units_.size());
  for (std::size_t u = 0; u < units_.size(); ++u) {
    const Unit& unit = units_[u];
    if (unit.rule.kind() != Rule::Kind::kDeterministic) {
      throw ModelError("composite unit '" + unit.name + "' must be a tabulated deterministic rule");
    }
    if (unit.sources.size() != unit.rule.parents().size()) {
      throw ModelError("composite unit '" + unit.name + "' source count mismatch");
    }
    for (std::size_t p = 0; p < unit.sources.size(); ++p) {
      const std::size_t src = unit.sources[p];
      if (src >= n_in + u) {
        throw ModelError("composite unit '" + unit.name + "' is not topologically ordered");
      }
      const std::uint32_t states =
          src < n_in ? inputs_.radix(src) : units_[src - n_in].rule.child_states();
      if (states != unit.rule.parents().radix(p)) {
        throw ModelError("composite unit '" + unit.name + "' source state count mismatch");
      }
      if (src < n_in) {
        reach[src][u] = true;
      } else {
        for (std::size_t i = 0; i < n_in; ++i) {
          if (reach[i][src - n_in]) reach[i][u] = true;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t u = 0; u < units_.size(); ++u) {
      if (reach[i][u]) dependents_[i].push_back(u);
    }
  }
}

State CompositeDag::evaluate(std::span<const State> inputs) const {
  const std::size_t n_in = inputs_.size();
  std::vector<State> values(n_in + units_.size());
  for (std::size_t i = 0; i < n_in; ++i) values[i] = inputs[i];
  std::vector<State> args;
  for (std::size_t u = 0; u < units_.size(); ++u) {
    args.clear();
    for (std::size_t src : units_[u].sources) args.push_back(values[src]);
    values[n_in + u] = units_[u].rule.deterministic_state(args);
  }
  return values.back();
}

}  // namespace relcomp
