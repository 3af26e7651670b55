#include "relcomp/rule_library.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "relcomp/error.hpp"

namespace relcomp {
namespace {

using Pred = std::function<bool(std::span<const State>)>;

StateClause clause(State s, std::string text, Pred holds) {
  return StateClause{s, std::move(text), std::move(holds)};
}

int count_eq(std::span<const State> s, State v) {
  return static_cast<int>(std::count(s.begin(), s.end(), v));
}

bool all_eq(std::span<const State> s, State v) { return count_eq(s, v) == static_cast<int>(s.size()); }

// Binary parts: 1 failed, 2 working.
constexpr State kFail = 1;
constexpr State kWork = 2;

struct DefinitionBuilder {
  BuiltinShape shape;
  std::function<StateDefinition()> make;
};

StateDefinition star_sensor() {
  return {"star_sensor",
          {clause(1, "both single star sensors fail", [](auto s) { return all_eq(s, kFail); })},
          2};
}

StateDefinition single_star_sensor() {
  return {"single_star_sensor",
          {clause(2, "at least two of four components work",
                  [](auto s) { return count_eq(s, kWork) >= 2; })},
          1};
}

// parents: H1, four components
StateDefinition single_star_sensor_ccf() {
  return {"single_star_sensor_ccf",
          {clause(2, "H1 absent and at least two components work",
                  [](auto s) { return s[0] == 1 && count_eq(s.subspan(1), kWork) >= 2; }),
           clause(2, "H1 present and at least three components work",
                  [](auto s) { return s[0] == 2 && count_eq(s.subspan(1), kWork) >= 3; })},
          1};
}

// parents: basic 1, optional 1, basic 2, optional 2
StateDefinition single_leveling_instrument() {
  return {"single_leveling_instrument",
          {clause(4, "all components work", [](auto s) { return all_eq(s, kWork); }),
           clause(3, "exactly one basic component fails",
                  [](auto s) {
                    return count_eq(s, kFail) == 1 && (s[0] == kFail || s[2] == kFail);
                  }),
           clause(1, "all components fail", [](auto s) { return all_eq(s, kFail); })},
          2};
}

StateDefinition three_of_four_level(const std::string& name) {
  return {name,
          {clause(1, "all parts fail", [](auto s) { return all_eq(s, 1); }),
           clause(3, "exactly one part at state 4", [](auto s) { return count_eq(s, 4) == 1; }),
           clause(4, "two or more parts at state 4", [](auto s) { return count_eq(s, 4) >= 2; })},
          2};
}

// parents: basic 1, optional 1, basic 2, optional 2
StateDefinition single_sun_sensor() {
  return {"single_sun_sensor",
          {clause(4, "both basic components work",
                  [](auto s) { return s[0] == kWork && s[2] == kWork; }),
           clause(3, "one basic fails with its optional working, other basic works",
                  [](auto s) {
                    return (s[0] == kFail && s[1] == kWork && s[2] == kWork) ||
                           (s[2] == kFail && s[3] == kWork && s[0] == kWork);
                  }),
           clause(1, "basic and optional of one standby pair fail",
                  [](auto s) {
                    return (s[0] == kFail && s[1] == kFail) || (s[2] == kFail && s[3] == kFail);
                  })},
          2};
}

StateDefinition sun_sensor() {
  return {"sun_sensor",
          {clause(1, "all single sun sensors fail", [](auto s) { return all_eq(s, 1); }),
           clause(3, "one or two at state 4",
                  [](auto s) { return count_eq(s, 4) >= 1 && count_eq(s, 4) <= 2; }),
           clause(4, "three or four at state 4", [](auto s) { return count_eq(s, 4) >= 3; })},
          2};
}

// parents: component 1, component 2, standby basic, standby optional
StateDefinition single_bearing_frame() {
  auto counts = [](std::span<const State> s) {
    return std::pair<int, int>{count_eq(s.subspan(0, 2), kWork), count_eq(s.subspan(2, 2), kWork)};
  };
  return {"single_bearing_frame",
          {clause(4, "all components work", [](auto s) { return all_eq(s, kWork); }),
           clause(3, "both main work and one standby works, or one main and both standby",
                  [counts](auto s) {
                    auto [c, h] = counts(s);
                    return (c == 2 && h == 1) || (c == 1 && h == 2);
                  }),
           clause(1, "both main fail or both standby fail",
                  [counts](auto s) {
                    auto [c, h] = counts(s);
                    return c == 0 || h == 0;
                  })},
          2};
}

StateDefinition single_trestle(const std::string& name) {
  return {name,
          {clause(3, "both components work", [](auto s) { return all_eq(s, kWork); }),
           clause(1, "both components fail", [](auto s) { return all_eq(s, kFail); })},
          2};
}

// parents: H2, H3, two components
StateDefinition single_trestle_1_ccf() {
  return {"single_trestle_1_ccf",
          {clause(3, "all components work and neither factor happens",
                  [](auto s) {
                    return s[2] == kWork && s[3] == kWork && s[0] == 1 && s[1] == 1;
                  }),
           clause(2, "all components work and exactly one factor happens",
                  [](auto s) {
                    return s[2] == kWork && s[3] == kWork && (s[0] == 2) != (s[1] == 2);
                  })},
          1};
}

StateDefinition trestle_1() {
  return {"trestle_1",
          {clause(1, "all single trestles fail", [](auto s) { return all_eq(s, 1); }),
           clause(3, "two or three work normally", [](auto s) { return count_eq(s, 3) >= 2; })},
          2};
}

StateDefinition trestle_2() {
  return {"trestle_2",
          {clause(1, "all single trestles fail", [](auto s) { return all_eq(s, 1); }),
           clause(3, "at least one works normally", [](auto s) { return count_eq(s, 3) >= 1; })},
          2};
}

// parents: star sensor (2), leveling instrument (4)
StateDefinition star_sensitive_horizon() {
  return {"star_sensitive_horizon",
          {clause(3, "both work normally", [](auto s) { return s[0] == 2 && s[1] == 4; }),
           clause(1, "either fails", [](auto s) { return s[0] == 1 || s[1] == 1; })},
          2};
}

// parents: star sensitive horizon (3), sun sensor (4)
StateDefinition attitude_sensor() {
  return {"attitude_sensor",
          {clause(4, "both work normally", [](auto s) { return s[0] == 3 && s[1] == 4; }),
           clause(3, "one normal, the other one level down",
                  [](auto s) {
                    return (s[0] == 3 && s[1] == 3) || (s[0] == 2 && s[1] == 4);
                  }),
           clause(1, "either fails", [](auto s) { return s[0] == 1 || s[1] == 1; })},
          2};
}

// parents: bearing frame (4), trestle 1 (3), trestle 2 (3)
StateDefinition structure() {
  return {"structure",
          {clause(4, "all three work normally",
                  [](auto s) { return s[0] == 4 && s[1] == 3 && s[2] == 3; }),
           clause(3, "two normal and the third one level down",
                  [](auto s) {
                    return (s[0] == 4 && s[1] == 3 && s[2] == 2) ||
                           (s[0] == 4 && s[2] == 3 && s[1] == 2) ||
                           (s[0] == 3 && s[1] == 3 && s[2] == 3);
                  }),
           clause(1, "two or more parts fail",
                  [](auto s) { return (s[0] == 1) + (s[1] == 1) + (s[2] == 1) >= 2; })},
          2};
}

// parents: attitude sensor (4), structure (4)
StateDefinition attitude_control_system() {
  return {"attitude_control_system",
          {clause(4, "both work normally", [](auto s) { return s[0] == 4 && s[1] == 4; }),
           clause(3, "one normal, the other one level down",
                  [](auto s) {
                    return (s[0] == 4 && s[1] == 3) || (s[0] == 3 && s[1] == 4);
                  }),
           clause(1, "either fails", [](auto s) { return s[0] == 1 || s[1] == 1; })},
          2};
}

const std::map<std::string, DefinitionBuilder>& definition_builders() {
  static const std::map<std::string, DefinitionBuilder> builders = {
      {"star_sensor", {{{2, 2}, 2}, star_sensor}},
      {"single_star_sensor", {{{2, 2, 2, 2}, 2}, single_star_sensor}},
      {"single_star_sensor_ccf", {{{2, 2, 2, 2, 2}, 2}, single_star_sensor_ccf}},
      {"single_leveling_instrument", {{{2, 2, 2, 2}, 4}, single_leveling_instrument}},
      {"leveling_instrument",
       {{{4, 4, 4}, 4}, [] { return three_of_four_level("leveling_instrument"); }}},
      {"single_sun_sensor", {{{2, 2, 2, 2}, 4}, single_sun_sensor}},
      {"sun_sensor", {{{4, 4, 4, 4}, 4}, sun_sensor}},
      {"single_bearing_frame", {{{2, 2, 2, 2}, 4}, single_bearing_frame}},
      {"bearing_frame", {{{4, 4, 4}, 4}, [] { return three_of_four_level("bearing_frame"); }}},
      {"single_trestle_1", {{{2, 2}, 3}, [] { return single_trestle("single_trestle_1"); }}},
      {"single_trestle_2", {{{2, 2}, 3}, [] { return single_trestle("single_trestle_2"); }}},
      {"single_trestle_1_ccf", {{{2, 2, 2, 2}, 3}, single_trestle_1_ccf}},
      {"trestle_1", {{{3, 3, 3}, 3}, trestle_1}},
      {"trestle_2", {{{3, 3}, 3}, trestle_2}},
      {"star_sensitive_horizon", {{{2, 4}, 3}, star_sensitive_horizon}},
      {"attitude_sensor", {{{3, 4}, 4}, attitude_sensor}},
      {"structure", {{{4, 3, 3}, 4}, structure}},
      {"attitude_control_system", {{{4, 4}, 4}, attitude_control_system}},
  };
  return builders;
}

// Literal structure reading: state 4 takes precedence over the state-3
// conditions it overlaps.
State structure_literal(std::span<const State> s) {
  if ((s[0] == 1) + (s[1] == 1) + (s[2] == 1) >= 2) return 1;
  if (s[0] == 4 && (s[1] == 3 || s[2] == 3)) return 4;
  if (s[0] == 3 && s[1] == 3 && s[2] == 3) return 3;
  return 2;
}

double param(const RuleParams& params, const std::string& key, const std::string& builder) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw ModelError("builder '" + builder + "' needs parameter '" + key + "'");
  }
  return it->second;
}

void require(bool ok, const std::string& builder, const std::string& what) {
  if (!ok) throw ModelError("builder '" + builder + "': " + what);
}

bool uniform_radix(const RadixVector& parents, std::uint32_t r) {
  for (auto x : parents.radices()) {
    if (x != r) return false;
  }
  return true;
}

}  // namespace

std::optional<StateDefinition> builtin_definition(const std::string& builder) {
  const auto& builders = definition_builders();
  auto it = builders.find(builder);
  if (it == builders.end()) return std::nullopt;
  return it->second.make();
}

std::optional<BuiltinShape> builtin_shape(const std::string& builder) {
  if (builder == "structure_literal") return BuiltinShape{{4, 3, 3}, 4};
  const auto& builders = definition_builders();
  auto it = builders.find(builder);
  if (it == builders.end()) return std::nullopt;
  return it->second.shape;
}

const std::vector<std::string>& builtin_rule_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"copy",         "k_of_n",       "series",
                                  "parallel",     "hot_standby",  "cold_standby",
                                  "downgrade_ladder", "pitch_axis", "structure_literal"};
    for (const auto& [name, b] : definition_builders()) n.push_back(name);
    return n;
  }();
  return names;
}

Rule make_builtin_rule(const std::string& builder, const RadixVector& parents,
                       std::uint32_t child_states, const RuleParams& params) {
  if (auto shape = builtin_shape(builder)) {
    require(parents.radices() == shape->parents && child_states == shape->child_states, builder,
            "parent radices or child state count do not match the definition");
    if (builder == "structure_literal") {
      return Rule::deterministic(parents, child_states, structure_literal, builder);
    }
    return Rule::from_definition(parents, child_states, *builtin_definition(builder));
  }

  const std::size_t n = parents.size();
  std::vector<std::uint32_t> top = parents.radices();
  auto working = [top](std::span<const State> s) {
    int w = 0;
    for (std::size_t i = 0; i < s.size(); ++i) w += s[i] == top[i];
    return w;
  };

  if (builder == "copy") {
    require(n == 1 && parents.radix(0) == child_states, builder,
            "needs one parent with the child's state count");
    return Rule::deterministic(parents, child_states, [](auto s) { return s[0]; }, builder);
  }
  if (builder == "k_of_n") {
    const double kd = param(params, "k", builder);
    require(kd >= 1 && kd <= static_cast<double>(n) && std::floor(kd) == kd, builder,
            "k must be an integer in 1..n");
    require(child_states == 2, builder, "child must have 2 states");
    const int k = static_cast<int>(kd);
    return Rule::deterministic(
        parents, 2, [working, k](auto s) -> State { return working(s) >= k ? 2 : 1; }, builder);
  }
  if (builder == "series" || builder == "parallel") {
    require(n >= 1 && uniform_radix(parents, child_states), builder,
            "all parents need the child's state count");
    const bool is_series = builder == "series";
    return Rule::deterministic(
        parents, child_states,
        [is_series](auto s) {
          return is_series ? *std::min_element(s.begin(), s.end())
                           : *std::max_element(s.begin(), s.end());
        },
        builder);
  }
  if (builder == "hot_standby" || builder == "cold_standby") {
    require(n == 2 && uniform_radix(parents, 2), builder, "needs two 2-state parents");
    require(child_states == 2 || child_states == 3, builder, "child must have 2 or 3 states");
    if (child_states == 2) {
      return Rule::deterministic(
          parents, 2, [](auto s) -> State { return s[0] == kWork || s[1] == kWork ? 2 : 1; },
          builder);
    }
    return Rule::deterministic(
        parents, 3,
        [](auto s) -> State {
          if (s[0] == kWork) return 3;
          return s[1] == kWork ? 2 : 1;
        },
        builder);
  }
  if (builder == "downgrade_ladder") {
    require(child_states == n + 1, builder, "child needs n + 1 states");
    return Rule::deterministic(
        parents, child_states, [working](auto s) { return static_cast<State>(working(s) + 1); },
        builder);
  }
  if (builder == "pitch_axis") {
    require(parents.radices() == std::vector<std::uint32_t>{3, 2, 2} && child_states == 3,
            builder, "needs parents (SM:3, DF:2, HR:2) and a 3-state child");
    return Rule::deterministic(
        parents, 3,
        [](auto s) -> State { return s[1] == kWork && s[2] == kWork ? s[0] : 1; }, builder);
  }
  throw DomainError("unknown rule builder '" + builder + "'");
}

}  // namespace relcomp
