#include "relcomp/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "relcomp/error.hpp"
#include "relcomp/rule_library.hpp"

namespace relcomp {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw ModelError(source + ": " + what);
}

const json& require_key(const json& obj, const char* key, const std::string& where,
                        const std::string& source) {
  if (!obj.is_object() || !obj.contains(key)) fail(source, where + " is missing '" + key + "'");
  return obj.at(key);
}

LifetimeDistribution parse_law(const json& j, const std::string& name, const std::string& source) {
  const std::string type = require_key(j, "type", "law '" + name + "'", source).get<std::string>();
  try {
    if (type == "exponential") {
      return LifetimeDistribution(Exponential{j.at("rate").get<double>()});
    }
    if (type == "weibull") {
      return LifetimeDistribution(Weibull{j.at("shape").get<double>(), j.at("scale").get<double>()});
    }
  } catch (const DomainError& e) {
    fail(source, "law '" + name + "': " + e.what());
  }
  fail(source, "law '" + name + "' has unknown type '" + type + "'");
}

NodeId lookup(const ModelBuilder& b, const std::string& name, const std::string& source) {
  if (auto id = b.find(name)) return *id;
  fail(source, "unknown node '" + name + "'");
}

Rule parse_rule(const json& j, const std::string& child, const ModelBuilder& b,
                std::vector<NodeId>& parents, const std::string& source) {
  std::vector<std::uint32_t> radices;
  for (const auto& p : require_key(j, "parents", "rule '" + child + "'", source)) {
    parents.push_back(lookup(b, p.get<std::string>(), source));
    radices.push_back(b.states(parents.back()));
  }
  const std::uint32_t child_states = b.states(lookup(b, child, source));
  RadixVector rv(radices);
  if (j.contains("builder")) {
    RuleParams params;
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) params[k] = v.get<double>();
    }
    return make_builtin_rule(j.at("builder").get<std::string>(), rv, child_states, params);
  }
  if (j.contains("table")) {
    std::vector<double> flat;
    for (const auto& row : j.at("table")) {
      if (!row.is_array()) fail(source, "rule '" + child + "': table rows must be arrays");
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
    return Rule::table(rv, child_states, std::move(flat), child);
  }
  fail(source, "rule '" + child + "' needs 'builder' or 'table'");
}

SystemModel parse(const json& doc, const std::string& source) {
  if (!doc.is_object()) fail(source, "top level must be an object");
  ModelBuilder b;
  for (const auto& n : require_key(doc, "nodes", "model", source)) {
    b.add_node(require_key(n, "name", "node", source).get<std::string>(),
               require_key(n, "states", "node", source).get<std::uint32_t>());
  }

  std::map<std::string, LifetimeDistribution> laws;
  if (doc.contains("laws")) {
    for (const auto& [name, j] : doc.at("laws").items()) laws.emplace(name, parse_law(j, name, source));
  }

  if (doc.contains("marginals")) {
    for (const auto& [name, j] : doc.at("marginals").items()) {
      const NodeId id = lookup(b, name, source);
      if (j.is_object()) {
        const std::string law = require_key(j, "law", "marginal '" + name + "'", source).get<std::string>();
        auto it = laws.find(law);
        if (it == laws.end()) fail(source, "marginal '" + name + "' references unknown law '" + law + "'");
        b.set_law(id, it->second);
      } else {
        b.set_marginal(id, j.get<std::vector<double>>());
      }
    }
  }

  std::map<NodeId, std::vector<NodeId>> declared_parents;
  if (doc.contains("rules")) {
    for (const auto& [name, j] : doc.at("rules").items()) {
      std::vector<NodeId> parents;
      Rule rule = parse_rule(j, name, b, parents, source);
      declared_parents[lookup(b, name, source)] = parents;
      b.set_rule(lookup(b, name, source), parents, std::move(rule));
    }
  }

  if (doc.contains("edges")) {
    std::map<NodeId, std::vector<NodeId>> from_edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail(source, "edges must be [parent, child] pairs");
      from_edges[lookup(b, e[1].get<std::string>(), source)].push_back(
          lookup(b, e[0].get<std::string>(), source));
    }
    for (auto& [child, ps] : from_edges) std::sort(ps.begin(), ps.end());
    auto sorted = declared_parents;
    for (auto& [child, ps] : sorted) std::sort(ps.begin(), ps.end());
    if (from_edges != sorted) fail(source, "edges do not match the parents listed in rules");
  }

  if (doc.contains("common_cause")) {
    for (const auto& cc : doc.at("common_cause")) {
      std::vector<NodeId> affected;
      for (const auto& a : require_key(cc, "affected", "common_cause", source)) {
        affected.push_back(lookup(b, a.get<std::string>(), source));
      }
      b.add_common_cause(
          lookup(b, require_key(cc, "factor", "common_cause", source).get<std::string>(), source),
          std::move(affected));
    }
  }

  if (doc.contains("time_grid")) {
    const json& g = doc.at("time_grid");
    TimeGrid grid;
    grid.t0 = g.value("t0", 0.0);
    grid.dt = require_key(g, "dt", "time_grid", source).get<double>();
    grid.count = require_key(g, "steps", "time_grid", source).get<std::size_t>();
    b.set_time_grid(grid);
  }
  if (doc.contains("reliability")) {
    b.set_reliability_min_state(
        require_key(doc.at("reliability"), "min_state", "reliability", source).get<State>());
  }
  return b.build();
}

}  // namespace

SystemModel parse_model(std::string_view json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(source, std::string("invalid JSON: ") + e.what());
  }
  try {
    return parse(doc, source);
  } catch (const json::exception& e) {
    fail(source, std::string("schema error: ") + e.what());
  }
}

SystemModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_model(text.str(), path);
}

}  // namespace relcomp
