#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "relcomp/inference.hpp"
#include "relcomp/model.hpp"
#include "relcomp/rule.hpp"
#include "relcomp/rule_library.hpp"

namespace relcomp::testing {

using Rng = std::mt19937_64;

inline std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Sequence mixing long runs, lone values, phrases and noise, drawn from a
// small value pool so repeats across the table are common.
inline std::vector<double> random_sequence(Rng& rng, std::size_t n) {
  std::vector<double> pool(uniform_int(rng, 1, 6));
  for (double& v : pool) v = uniform01(rng) < 0.2 ? 0.0 : uniform01(rng);
  if (uniform01(rng) < 0.3) pool.push_back(-0.0);
  std::vector<double> out;
  out.reserve(n);
  const double p_noise = uniform01(rng) * 0.3;
  while (out.size() < n) {
    const double r = uniform01(rng);
    const std::size_t room = n - out.size();
    if (r < p_noise) {
      out.push_back(uniform01(rng));
    } else if (r < 0.5) {
      const std::size_t len = std::min<std::size_t>(room, uniform_int(rng, 1, 40));
      const double v = pool[uniform_int(rng, 0, pool.size() - 1)];
      out.insert(out.end(), len, v);
    } else {
      const double a = pool[uniform_int(rng, 0, pool.size() - 1)];
      const double b = pool[uniform_int(rng, 0, pool.size() - 1)];
      const std::size_t len = std::min<std::size_t>(room, uniform_int(rng, 2, 12));
      const std::size_t reps = uniform_int(rng, 1, 5);
      for (std::size_t k = 0; k < reps && out.size() < n; ++k) {
        out.push_back(a);
        for (std::size_t i = 1; i < len && out.size() < n; ++i) out.push_back(b);
      }
    }
  }
  out.resize(n);
  return out;
}

inline std::vector<double> random_simplex(Rng& rng, std::size_t k, double p_zero = 0.0) {
  std::vector<double> p(k);
  double s = 0.0;
  for (auto& v : p) {
    v = uniform01(rng) < p_zero ? 0.0 : 0.05 + uniform01(rng);
    s += v;
  }
  if (s == 0.0) {
    p[uniform_int(rng, 0, k - 1)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= s;
  return p;
}

// Rows are either random distributions or point masses.
inline Rule random_rule(Rng& rng, const RadixVector& parents, std::uint32_t child_states,
                        double p_deterministic) {
  if (uniform01(rng) < 0.3) {
    std::vector<State> fn(parents.total());
    for (auto& s : fn) s = static_cast<State>(uniform_int(rng, 1, child_states));
    return Rule::deterministic(
        parents, child_states,
        [fn, parents](std::span<const State> s) { return fn[states_to_row(s, parents) - 1]; },
        "random_fn");
  }
  std::vector<double> rows;
  rows.reserve(parents.total() * child_states);
  for (std::uint64_t r = 0; r < parents.total(); ++r) {
    if (uniform01(rng) < p_deterministic) {
      const auto hit = uniform_int(rng, 0, child_states - 1);
      for (std::uint32_t c = 0; c < child_states; ++c) rows.push_back(c == hit ? 1.0 : 0.0);
    } else {
      auto p = random_simplex(rng, child_states, 0.15);
      rows.insert(rows.end(), p.begin(), p.end());
    }
  }
  return Rule::table(parents, child_states, std::move(rows), "random_table");
}

struct RandomModelOptions {
  std::uint64_t max_joint = 1'000'000;
  std::size_t max_block_roots = 4;
  std::size_t max_children = 4;
  std::size_t max_independent = 3;
  double p_deterministic = 0.4;
};

// Single-level model: independent root parents of the leaf, plus non-root
// leaf parents whose parents are drawn from a separate pool of roots.
inline SystemModel random_dependent_model(Rng& rng, const RandomModelOptions& opt = {}) {
  for (;;) {
    ModelBuilder b;
    std::vector<NodeId> leaf_parents;
    std::uint64_t joint = 1;
    const std::size_t n_pool = uniform_int(rng, 1, opt.max_block_roots);
    std::vector<NodeId> pool;
    for (std::size_t i = 0; i < n_pool; ++i) {
      const auto k = static_cast<std::uint32_t>(uniform_int(rng, 2, 3));
      const NodeId id = b.add_node("R" + std::to_string(i), k);
      b.set_marginal(id, random_simplex(rng, k, 0.1));
      pool.push_back(id);
      joint *= k;
    }
    const std::size_t n_ind = uniform_int(rng, 0, opt.max_independent);
    for (std::size_t i = 0; i < n_ind; ++i) {
      const auto k = static_cast<std::uint32_t>(uniform_int(rng, 2, 3));
      const NodeId id = b.add_node("I" + std::to_string(i), k);
      b.set_marginal(id, random_simplex(rng, k, 0.1));
      leaf_parents.push_back(id);
      joint *= k;
    }
    const std::size_t n_children = uniform_int(rng, 1, opt.max_children);
    std::vector<bool> used(pool.size(), false);
    for (std::size_t i = 0; i < n_children; ++i) {
      const auto k = static_cast<std::uint32_t>(uniform_int(rng, 2, 3));
      const NodeId id = b.add_node("X" + std::to_string(i), k);
      std::vector<NodeId> ps;
      for (std::size_t r = 0; r < pool.size(); ++r) {
        if (uniform01(rng) < 0.5) ps.push_back(pool[r]);
      }
      if (ps.empty()) ps.push_back(pool[uniform_int(rng, 0, pool.size() - 1)]);
      std::vector<std::uint32_t> radices;
      for (NodeId p : ps) {
        radices.push_back(b.states(p));
        used[p] = true;
      }
      b.set_rule(id, ps, random_rule(rng, RadixVector(radices), k, opt.p_deterministic));
      leaf_parents.push_back(id);
      joint *= k;
    }
    // An unused pool root would become a second leaf.
    if (std::find(used.begin(), used.end(), false) != used.end()) continue;
    std::shuffle(leaf_parents.begin(), leaf_parents.end(), rng);
    const auto ks = static_cast<std::uint32_t>(uniform_int(rng, 2, 3));
    const NodeId leaf = b.add_node("S", ks);
    std::vector<std::uint32_t> radices;
    for (NodeId p : leaf_parents) radices.push_back(b.states(p));
    b.set_rule(leaf, leaf_parents, random_rule(rng, RadixVector(radices), ks, opt.p_deterministic));
    joint *= ks;
    if (joint > opt.max_joint) continue;
    return b.build();
  }
}

// Random Q/E aimed at one dispatch situation: 1 = empty query, 2 = query
// on roots only, 3 = query or evidence touching a non-root leaf parent.
inline QuerySpec random_query(Rng& rng, const SystemModel& m, int situation) {
  const NodeId leaf = m.leaf();
  std::vector<NodeId> roots, children;
  for (NodeId n = 0; n < m.size(); ++n) {
    if (n == leaf) continue;
    (m.is_root(n) ? roots : children).push_back(n);
  }
  std::shuffle(roots.begin(), roots.end(), rng);
  std::shuffle(children.begin(), children.end(), rng);
  auto pick = [&](NodeId n) { return std::make_pair(n, static_cast<State>(uniform_int(rng, 1, m.states(n)))); };
  QuerySpec q;
  std::size_t r = 0;
  const std::size_t n_evidence = uniform_int(rng, 0, std::min<std::size_t>(2, roots.size()));
  for (; r < n_evidence; ++r) q.evidence.push_back(pick(roots[r]));
  if (situation == 2 && r < roots.size()) {
    const std::size_t n_q = uniform_int(rng, 1, roots.size() - r);
    for (std::size_t i = 0; i < n_q; ++i) q.query.push_back(pick(roots[r + i]));
  }
  if (situation == 3 && !children.empty()) {
    const std::size_t n_q = uniform_int(rng, 1, children.size());
    for (std::size_t i = 0; i < n_q; ++i) {
      if (uniform01(rng) < 0.25 && i > 0) {
        q.evidence.push_back(pick(children[i]));
      } else {
        q.query.push_back(pick(children[i]));
      }
    }
    if (r < roots.size() && uniform01(rng) < 0.5) q.query.push_back(pick(roots[r]));
  }
  return q;
}

}  // namespace relcomp::testing

#include "relcomp/blocks.hpp"

namespace relcomp::testing {

// Blocks by transitive closure of the "shares a root parent" relation over
// the leaf's non-root parents (adjacency matrix, Warshall).
struct NaiveBlock {
  std::vector<NodeId> roots;
  std::vector<NodeId> children;
  bool operator==(const NaiveBlock&) const = default;
};

inline std::vector<NaiveBlock> brute_force_blocks(const SystemModel& m) {
  const NodeId leaf = m.leaf();
  std::vector<NodeId> kids;
  for (NodeId p : m.parents(leaf)) {
    if (!m.is_root(p)) kids.push_back(p);
  }
  std::sort(kids.begin(), kids.end());
  const std::size_t n = kids.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        reach[i][j] = true;
        continue;
      }
      for (NodeId a : m.parents(kids[i])) {
        const auto& pj = m.parents(kids[j]);
        if (std::find(pj.begin(), pj.end(), a) != pj.end()) reach[i][j] = true;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::vector<NaiveBlock> out;
  std::vector<bool> done(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    NaiveBlock b;
    for (std::size_t j = 0; j < n; ++j) {
      if (!reach[i][j]) continue;
      done[j] = true;
      b.children.push_back(kids[j]);
      for (NodeId r : m.parents(kids[j])) b.roots.push_back(r);
    }
    std::sort(b.roots.begin(), b.roots.end());
    b.roots.erase(std::unique(b.roots.begin(), b.roots.end()), b.roots.end());
    out.push_back(std::move(b));
  }
  return out;
}

inline bool blocks_match_brute_force(const SystemModel& m) {
  const Partition p = find_blocks(m);
  std::vector<NaiveBlock> got;
  for (const Block& b : p.blocks) {
    NaiveBlock nb{b.roots, b.children};
    std::sort(nb.roots.begin(), nb.roots.end());
    std::sort(nb.children.begin(), nb.children.end());
    got.push_back(nb);
  }
  auto expect = brute_force_blocks(m);
  auto key = [](const NaiveBlock& b) { return b.children.front(); };
  std::sort(got.begin(), got.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  std::sort(expect.begin(), expect.end(), [&](auto& a, auto& b) { return key(a) < key(b); });
  std::vector<NodeId> indep;
  for (NodeId q : m.parents(m.leaf())) {
    if (m.is_root(q)) indep.push_back(q);
  }
  std::vector<NodeId> got_indep = p.independent_nodes;
  std::sort(indep.begin(), indep.end());
  std::sort(got_indep.begin(), got_indep.end());
  return got == expect && got_indep == indep;
}

struct Counterexample {
  int condition;
  SystemModel model;
};

// One model per structural precondition, each violating it.
inline std::vector<Counterexample> structure_counterexamples() {
  const Rule copy = Rule::table(RadixVector({2}), 2, {1, 0, 0, 1});
  const Rule and2 = Rule::deterministic(RadixVector({2, 2}), 2,
                                        [](std::span<const State> s) { return std::min(s[0], s[1]); }, "and");
  std::vector<Counterexample> out;
  {
    ModelBuilder b;
    const NodeId a = b.add_node("A", 2), c = b.add_node("B", 2);
    const NodeId s = b.add_node("S", 2), t = b.add_node("T", 2);
    b.set_marginal(a, {0.5, 0.5}).set_marginal(c, {0.5, 0.5});
    b.set_rule(s, {a}, copy).set_rule(t, {c}, copy);
    out.push_back({1, b.build()});
  }
  {
    ModelBuilder b;
    const NodeId r = b.add_node("R", 2), x = b.add_node("X", 2), y = b.add_node("Y", 2);
    const NodeId s = b.add_node("S", 2);
    b.set_marginal(r, {0.3, 0.7});
    b.set_rule(x, {r}, copy).set_rule(y, {x}, copy).set_rule(s, {y}, copy);
    out.push_back({2, b.build()});
  }
  {
    ModelBuilder b;
    const NodeId r = b.add_node("R", 2), x = b.add_node("X", 2), s = b.add_node("S", 2);
    b.set_marginal(r, {0.3, 0.7});
    b.set_rule(x, {r}, copy).set_rule(s, {r, x}, and2);
    out.push_back({3, b.build()});
  }
  {
    ModelBuilder b;
    const NodeId r = b.add_node("R", 2), u = b.add_node("U", 2), x = b.add_node("X", 2);
    const NodeId s = b.add_node("S", 2);
    b.set_marginal(r, {0.3, 0.7});
    b.set_rule(u, {r}, copy).set_rule(x, {u}, copy).set_rule(s, {x}, copy);
    out.push_back({4, b.build()});
  }
  return out;
}

inline bool has_condition(const std::vector<StructureViolation>& v, int c) {
  return std::any_of(v.begin(), v.end(), [c](const StructureViolation& x) { return x.condition == c; });
}

}  // namespace relcomp::testing

namespace relcomp::testing {

// Two-level tree: first-level nodes over per-unit root pools, deterministic
// units over them, and a leaf over the units plus an optional extra node.
inline SystemModel random_multilevel_model(Rng& rng, std::uint64_t max_joint = 1'000'000,
                                           bool deterministic_leaf = false) {
  for (;;) {
    ModelBuilder b;
    std::uint64_t joint = 1;
    std::vector<NodeId> leaf_parents;
    int next = 0;
    auto root = [&](std::uint32_t k) {
      const NodeId id = b.add_node("r" + std::to_string(next++), k);
      b.set_marginal(id, random_simplex(rng, k, 0.1));
      joint *= k;
      return id;
    };
    auto first_level = [&](const std::vector<NodeId>& pool) {
      std::vector<NodeId> ps;
      for (NodeId r : pool) {
        if (uniform01(rng) < 0.6) ps.push_back(r);
      }
      if (ps.empty()) ps.push_back(pool[uniform_int(rng, 0, pool.size() - 1)]);
      std::vector<std::uint32_t> rad;
      for (NodeId p : ps) rad.push_back(b.states(p));
      const auto k = static_cast<std::uint32_t>(uniform_int(rng, 2, 3));
      const NodeId id = b.add_node("f" + std::to_string(next++), k);
      b.set_rule(id, ps, random_rule(rng, RadixVector(rad), k, 0.4));
      joint *= k;
      return id;
    };
    const std::size_t n_units = uniform_int(rng, 1, 3);
    for (std::size_t u = 0; u < n_units; ++u) {
      std::vector<NodeId> pool;
      for (std::size_t i = 0, n = uniform_int(rng, 1, 3); i < n; ++i) {
        pool.push_back(root(static_cast<std::uint32_t>(uniform_int(rng, 2, 3))));
      }
      std::vector<NodeId> ins;
      for (std::size_t i = 0, n = uniform_int(rng, 1, 3); i < n; ++i) ins.push_back(first_level(pool));
      if (uniform01(rng) < 0.4) ins.push_back(root(2));
      std::vector<std::uint32_t> rad;
      for (NodeId p : ins) rad.push_back(b.states(p));
      const auto k = static_cast<std::uint32_t>(uniform_int(rng, 2, 4));
      std::vector<State> fn(RadixVector(rad).total());
      for (auto& s : fn) s = static_cast<State>(uniform_int(rng, 1, k));
      const RadixVector rv(rad);
      const NodeId id = b.add_node("u" + std::to_string(next++), k);
      b.set_rule(id, ins,
                 Rule::deterministic(
                     rv, k, [fn, rv](std::span<const State> s) { return fn[states_to_row(s, rv) - 1]; }, "unit"));
      joint *= k;
      leaf_parents.push_back(id);
    }
    if (uniform01(rng) < 0.5) {
      std::vector<NodeId> pool{root(2), root(static_cast<std::uint32_t>(uniform_int(rng, 2, 3)))};
      leaf_parents.push_back(first_level(pool));
    }
    std::vector<std::uint32_t> rad;
    for (NodeId p : leaf_parents) rad.push_back(b.states(p));
    const auto ks = static_cast<std::uint32_t>(uniform_int(rng, 2, 3));
    const NodeId s = b.add_node("S", ks);
    if (deterministic_leaf) {
      const RadixVector rv(rad);
      std::vector<State> fn(rv.total());
      for (auto& x : fn) x = static_cast<State>(uniform_int(rng, 1, ks));
      b.set_rule(s, leaf_parents,
                 Rule::deterministic(
                     rv, ks, [fn, rv](std::span<const State> st) { return fn[states_to_row(st, rv) - 1]; }, "leaf"));
    } else {
      b.set_rule(s, leaf_parents, random_rule(rng, RadixVector(rad), ks, 0.5));
    }
    joint *= ks;
    if (joint > max_joint) continue;
    SystemModel m = b.build();
    if (m.leaves().size() != 1) continue;  // a pool root picked by nobody
    return m;
  }
}

}  // namespace relcomp::testing
