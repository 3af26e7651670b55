#include <algorithm>
#include <map>

#include "relcomp/error.hpp"
#include "relcomp/inference.hpp"

namespace relcomp {
namespace {

struct Levels {
  std::vector<bool> first_level;  // non-root, all parents roots, not the leaf
  std::vector<bool> unit;         // non-root, not first-level, or the leaf
  NodeId leaf;
};

Levels classify(const SystemModel& model) {
  Levels lv;
  lv.leaf = model.leaf();
  lv.first_level.assign(model.size(), false);
  lv.unit.assign(model.size(), false);
  for (NodeId n = 0; n < model.size(); ++n) {
    if (model.is_root(n)) continue;
    const auto& ps = model.parents(n);
    const bool all_roots = std::all_of(ps.begin(), ps.end(), [&](NodeId p) { return model.is_root(p); });
    if (all_roots && n != lv.leaf) {
      lv.first_level[n] = true;
    } else {
      lv.unit[n] = true;
    }
  }
  return lv;
}

}  // namespace

std::vector<NodeId> flat_frontier(const SystemModel& model) {
  const Levels lv = classify(model);
  std::vector<NodeId> frontier;
  for (NodeId n = 0; n < model.size(); ++n) {
    if (lv.first_level[n]) {
      frontier.push_back(n);
    } else if (model.is_root(n)) {
      const auto& cs = model.children(n);
      if (std::any_of(cs.begin(), cs.end(), [&](NodeId c) { return lv.unit[c]; })) frontier.push_back(n);
    }
  }
  return frontier;
}

SystemModel flatten(const SystemModel& model) {
  const Levels lv = classify(model);
  const std::vector<NodeId> frontier = flat_frontier(model);
  std::vector<std::size_t> slot(model.size(), static_cast<std::size_t>(-1));
  std::vector<std::uint32_t> inputs;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    slot[frontier[i]] = i;
    inputs.push_back(model.states(frontier[i]));
  }
  std::vector<CompositeDag::Unit> units;
  for (NodeId n : model.topological_order()) {
    if (!lv.unit[n]) continue;
    const Rule& r = model.rule(n);
    if (r.kind() != Rule::Kind::kDeterministic) {
      throw ModelError("flat mode needs a deterministic tabulated rule for '" + model.node(n).name + "'");
    }
    CompositeDag::Unit u{model.node(n).name, {}, r};
    for (NodeId p : model.parents(n)) {
      if (slot[p] == static_cast<std::size_t>(-1)) {
        throw ModelError("flat mode: '" + model.node(p).name + "' feeds '" + model.node(n).name +
                         "' but is not on the frontier");
      }
      u.sources.push_back(slot[p]);
    }
    slot[n] = frontier.size() + units.size();
    units.push_back(std::move(u));
  }
  if (units.size() == 1) return model;
  auto dag = std::make_shared<const CompositeDag>(RadixVector(inputs), std::move(units));

  ModelBuilder b;
  std::vector<std::size_t> local(model.size(), static_cast<std::size_t>(-1));
  std::vector<bool> keep(model.size(), false);
  for (NodeId n : frontier) keep[n] = true;
  for (NodeId n = 0; n < model.size(); ++n) {
    if (lv.first_level[n]) {
      for (NodeId p : model.parents(n)) keep[p] = true;
    }
  }
  keep[lv.leaf] = true;
  for (NodeId n = 0; n < model.size(); ++n) {
    if (!keep[n]) continue;
    local[n] = b.add_node(model.node(n).name, model.states(n));
    if (model.is_root(n)) {
      if (model.law(n)) b.set_law(local[n], *model.law(n));
      b.set_marginal(local[n], model.marginal(n));
    }
  }
  for (NodeId n = 0; n < model.size(); ++n) {
    if (!lv.first_level[n]) continue;
    std::vector<NodeId> ps;
    for (NodeId p : model.parents(n)) ps.push_back(local[p]);
    b.set_rule(local[n], ps, model.rule(n));
  }
  std::vector<NodeId> leaf_parents;
  for (NodeId f : frontier) leaf_parents.push_back(local[f]);
  b.set_rule(local[lv.leaf], leaf_parents, Rule::composite(dag, model.rule(lv.leaf).name() + "[flat]"));
  for (const auto& cc : model.common_causes()) {
    std::vector<NodeId> affected;
    bool ok = local[cc.factor] != static_cast<std::size_t>(-1);
    for (NodeId a : cc.affected) {
      ok = ok && local[a] != static_cast<std::size_t>(-1);
      if (ok) affected.push_back(local[a]);
    }
    if (ok) b.add_common_cause(local[cc.factor], affected);
  }
  if (model.time_grid()) b.set_time_grid(*model.time_grid());
  if (model.reliability_min_state()) b.set_reliability_min_state(*model.reliability_min_state());
  return b.build();
}

namespace {

Assignment translate(const Assignment& a, const SystemModel& from, const SystemModel& to) {
  Assignment out;
  for (auto [n, s] : a) {
    auto id = to.find(from.node(n).name);
    if (!id) {
      throw DomainError("node '" + from.node(n).name +
                        "' is composed into the leaf rule in flat mode and cannot be queried");
    }
    out.emplace_back(*id, s);
  }
  return out;
}

InferenceResult infer_multilevel(const SystemModel& model, const QuerySpec& spec,
                                 const InferenceOptions& options) {
  const Levels lv = classify(model);
  const NodeId leaf = lv.leaf;
  // The local problem (unit) each node belongs to.
  std::vector<NodeId> home(model.size(), leaf);
  auto only_child = [&](NodeId n) {
    const auto& cs = model.children(n);
    if (cs.size() != 1) {
      throw ModelError("multilevel inference needs '" + model.node(n).name +
                       "' to have exactly one child; it has " + std::to_string(cs.size()));
    }
    return cs.front();
  };
  for (NodeId n = 0; n < model.size(); ++n) {
    if (n == leaf || model.is_root(n)) continue;
    home[n] = only_child(n);
  }
  for (NodeId r = 0; r < model.size(); ++r) {
    if (!model.is_root(r)) continue;
    std::optional<NodeId> unit;
    for (NodeId c : model.children(r)) {
      const NodeId u = lv.unit[c] ? c : home[c];
      if (unit && *unit != u) {
        throw ModelError("multilevel inference needs root '" + model.node(r).name +
                         "' to feed a single subsystem; it feeds '" + model.node(*unit).name +
                         "' and '" + model.node(u).name + "'");
      }
      unit = u;
    }
    if (unit) home[r] = *unit;
  }
  for (const Assignment* a : {&spec.query, &spec.evidence}) {
    for (auto [n, s] : *a) {
      if (n >= model.size()) throw DomainError("query references an unknown node id");
      if (n == leaf) {
        throw DomainError("the leaf '" + model.node(n).name + "' cannot be queried or observed");
      }
    }
  }
  std::map<NodeId, QuerySpec> routed;
  for (auto [n, s] : spec.query) routed[home[n]].query.emplace_back(n, s);
  for (auto [n, s] : spec.evidence) routed[home[n]].evidence.emplace_back(n, s);

  std::vector<std::vector<double>> unit_marginal(model.size());
  InferenceResult last;
  int situation = 1;
  ReduceStats largest;
  for (NodeId u : model.topological_order()) {
    if (!lv.unit[u]) continue;
    ModelBuilder b;
    std::vector<NodeId> local(model.size(), static_cast<NodeId>(-1));
    auto add_root = [&](NodeId n, const std::vector<double>& marginal) {
      if (local[n] != static_cast<NodeId>(-1)) return;
      local[n] = b.add_node(model.node(n).name, model.states(n));
      b.set_marginal(local[n], marginal);
    };
    for (NodeId p : model.parents(u)) {
      if (model.is_root(p)) {
        add_root(p, model.marginal(p));
      } else if (lv.unit[p]) {
        add_root(p, unit_marginal[p]);
      } else {
        for (NodeId r : model.parents(p)) add_root(r, model.marginal(r));
        local[p] = b.add_node(model.node(p).name, model.states(p));
      }
    }
    for (NodeId p : model.parents(u)) {
      if (lv.first_level[p]) {
        std::vector<NodeId> ps;
        for (NodeId r : model.parents(p)) ps.push_back(local[r]);
        b.set_rule(local[p], ps, model.rule(p));
      }
    }
    local[u] = b.add_node(model.node(u).name, model.states(u));
    std::vector<NodeId> ps;
    for (NodeId p : model.parents(u)) ps.push_back(local[p]);
    b.set_rule(local[u], ps, model.rule(u));
    const SystemModel sub = b.build();

    QuerySpec local_spec;
    if (auto it = routed.find(u); it != routed.end()) {
      local_spec.query = translate(it->second.query, model, sub);
      local_spec.evidence = translate(it->second.evidence, model, sub);
    }
    InferenceResult r = dependent_infer(sub, local_spec, options);
    situation = std::max(situation, r.situation);
    if (r.largest.dense_entries >= largest.dense_entries) largest = r.largest;
    unit_marginal[u] = r.distribution.values;
    if (u == leaf) last = std::move(r);
  }
  last.situation = situation;
  last.largest = largest;
  return last;
}

}  // namespace

InferenceResult infer(const SystemModel& model, const QuerySpec& spec, const InferenceOptions& options) {
  if (options.mode == InferenceMode::kFlat) {
    const SystemModel flat = flatten(model);
    QuerySpec s{translate(spec.query, model, flat), translate(spec.evidence, model, flat)};
    return dependent_infer(flat, s, options);
  }
  return infer_multilevel(model, spec, options);
}

}  // namespace relcomp
