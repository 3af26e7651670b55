#include "relcomp/inference.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "relcomp/error.hpp"

namespace relcomp {
namespace {

// One digit of a generated table layout.
struct Digit {
  std::uint32_t radix;
  bool is_leaf = false;
  std::vector<std::size_t> members;      // rule parent positions
  std::vector<std::uint32_t> decode;     // [state0 * members + j] -> member state0
};

Digit slot_digit(const Slot& slot) {
  Digit d;
  d.radix = static_cast<std::uint32_t>(slot.decode.total());
  d.members = slot.members;
  const std::size_t m = slot.members.size();
  d.decode.resize(static_cast<std::size_t>(d.radix) * m);
  Odometer odo(slot.decode);
  for (std::uint32_t k = 0; k < d.radix; ++k) {
    for (std::size_t j = 0; j < m; ++j) d.decode[k * m + j] = odo.digit(j);
    odo.advance();
  }
  return d;
}

// Pr(S = s | parents) laid out over slot digits and one leaf digit.
class SlotRuleSource final : public TableSource {
 public:
  SlotRuleSource(Rule rule, std::shared_ptr<const std::vector<Digit>> digits)
      : rule_(std::move(rule)), digits_(std::move(digits)), cursor_(rule_.cursor()) {
    std::vector<std::uint32_t> radices;
    for (const Digit& d : *digits_) radices.push_back(d.radix);
    rv_ = RadixVector(radices);
  }
  std::uint64_t size() const override { return rv_.total(); }
  std::unique_ptr<TableSource> clone() const override {
    return std::make_unique<SlotRuleSource>(rule_, digits_);
  }
  void fill(std::uint64_t first, std::span<double> out) override {
    Odometer odo(rv_);
    odo.seek(first);
    const std::size_t n = digits_->size();
    for (std::size_t j = 0; j < n; ++j) apply(j, odo.digit(j));
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = cursor_->probability(leaf0_);
      const std::size_t changed = odo.advance();
      if (changed == n) break;
      for (std::size_t j = changed; j < n; ++j) apply(j, odo.digit(j));
    }
  }

 private:
  void apply(std::size_t j, std::uint32_t state0) {
    const Digit& d = (*digits_)[j];
    if (d.is_leaf) {
      leaf0_ = state0;
      return;
    }
    const std::size_t m = d.members.size();
    const std::uint32_t* dec = d.decode.data() + static_cast<std::size_t>(state0) * m;
    for (std::size_t k = 0; k < m; ++k) cursor_->set(d.members[k], dec[k]);
  }

  Rule rule_;
  std::shared_ptr<const std::vector<Digit>> digits_;
  std::unique_ptr<RuleCursor> cursor_;
  RadixVector rv_;
  std::uint32_t leaf0_ = 0;
};

// Joint of a block over [children..., roots...].
class BlockJointSource final : public TableSource {
 public:
  BlockJointSource(const Block& block, const SystemModel& model) {
    std::vector<std::uint32_t> radices;
    for (NodeId c : block.children) {
      radices.push_back(model.states(c));
      rules_.push_back(model.rule(c));
    }
    for (NodeId r : block.roots) {
      radices.push_back(model.states(r));
      marginals_.push_back(model.marginal(r));
    }
    rv_ = RadixVector(radices);
    feeds_.resize(block.roots.size());
    for (std::size_t c = 0; c < block.children.size(); ++c) {
      const auto& ps = model.parents(block.children[c]);
      for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto it = std::find(block.roots.begin(), block.roots.end(), ps[p]);
        feeds_[static_cast<std::size_t>(it - block.roots.begin())].push_back({c, p});
      }
    }
    init_cursors();
  }
  BlockJointSource(const BlockJointSource& o)
      : rv_(o.rv_), rules_(o.rules_), marginals_(o.marginals_), feeds_(o.feeds_) {
    init_cursors();
  }
  std::uint64_t size() const override { return rv_.total(); }
  std::unique_ptr<TableSource> clone() const override {
    return std::make_unique<BlockJointSource>(*this);
  }
  void fill(std::uint64_t first, std::span<double> out) override {
    Odometer odo(rv_);
    odo.seek(first);
    const std::size_t nc = rules_.size();
    for (std::size_t r = 0; r < marginals_.size(); ++r) set_root(r, odo.digit(nc + r));
    for (std::size_t i = 0; i < out.size(); ++i) {
      double v = 1.0;
      for (std::size_t r = 0; r < marginals_.size(); ++r) v *= marginals_[r][odo.digit(nc + r)];
      for (std::size_t c = 0; c < nc && v != 0.0; ++c) v *= cursors_[c]->probability(odo.digit(c));
      out[i] = v;
      const std::size_t changed = odo.advance();
      if (changed == odo.size()) break;
      for (std::size_t j = std::max(changed, nc); j < odo.size(); ++j) set_root(j - nc, odo.digit(j));
    }
  }

 private:
  void init_cursors() {
    cursors_.clear();
    for (const Rule& r : rules_) cursors_.push_back(r.cursor());
  }
  void set_root(std::size_t r, std::uint32_t state0) {
    for (auto [c, p] : feeds_[r]) cursors_[c]->set(p, state0);
  }

  RadixVector rv_;
  std::vector<Rule> rules_;
  std::vector<std::vector<double>> marginals_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> feeds_;
  std::vector<std::unique_ptr<RuleCursor>> cursors_;
};

void keep_largest(ReduceStats& into, const ReduceStats& s) {
  if (s.dense_entries >= into.dense_entries) into = s;
}

std::vector<double> point_mass(std::uint32_t states, State s) {
  std::vector<double> p(states, 0.0);
  p[s - 1] = 1.0;
  return p;
}

std::string describe(const SystemModel& m, NodeId n, State s) {
  return m.node(n).name + "=" + std::to_string(s);
}

void check_spec(const SystemModel& model, const QuerySpec& spec, NodeId leaf) {
  std::vector<bool> seen(model.size(), false);
  auto check = [&](const Assignment& a) {
    for (auto [n, s] : a) {
      if (n >= model.size()) throw DomainError("query references an unknown node id");
      if (s < 1 || s > model.states(n)) {
        throw DomainError("state " + std::to_string(s) + " of '" + model.node(n).name +
                          "' outside 1.." + std::to_string(model.states(n)));
      }
      if (n == leaf) throw DomainError("the leaf '" + model.node(n).name + "' cannot be queried or observed");
      if (seen[n]) {
        throw DomainError("node '" + model.node(n).name + "' appears twice in the query and evidence");
      }
      seen[n] = true;
    }
  };
  check(spec.query);
  check(spec.evidence);
}

}  // namespace

Assignment parse_assignment(const SystemModel& model, const std::string& text) {
  Assignment out;
  std::size_t pos = 0;
  auto trim = [](std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
  };
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = trim(text.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) {
      if (comma == text.size()) break;
      throw DomainError("empty item in assignment '" + text + "'");
    }
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("expected NODE=STATE, got '" + item + "'");
    const std::string name = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    const NodeId id = model.id_of(name);
    std::size_t used = 0;
    unsigned long s = 0;
    try {
      s = std::stoul(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw DomainError("state of '" + name + "' is not an integer: '" + value + "'");
    }
    if (s < 1 || s > model.states(id)) {
      throw DomainError("state " + value + " of '" + name + "' outside 1.." +
                        std::to_string(model.states(id)));
    }
    out.emplace_back(id, static_cast<State>(s));
  }
  return out;
}

Distribution block_joint(const Block& block, const SystemModel& model, const ReduceOptions& options,
                         ReduceStats* stats) {
  BlockJointSource source(block, model);
  std::vector<EliminationStep> steps;
  for (std::size_t r = block.roots.size(); r-- > 0;) {
    steps.push_back({model.states(block.roots[r]), {}});
  }
  const CompressedTable t = reduce_trailing(source, steps, options, stats);
  Distribution d;
  for (NodeId c : block.children) d.labels.push_back(model.node(c).name);
  d.radices = block.child_radices;
  d.values = decompress(t);
  d.check_normalized(1e-9, "joint of block " + block_name(block, model));
  return d;
}

ConditionalTable independent_infer(const Rule& leaf_rule, const std::vector<Slot>& slots,
                                   const std::vector<std::size_t>& query_slots,
                                   const ReduceOptions& options, ReduceStats* stats) {
  std::vector<bool> is_query(slots.size(), false);
  for (std::size_t q : query_slots) {
    if (q >= slots.size() || is_query[q]) throw DomainError("invalid query slot list");
    is_query[q] = true;
  }
  for (const Slot& s : slots) {
    if (s.marginal.size() != s.decode.total()) {
      throw ModelError("slot '" + s.label + "' marginal does not match its state count");
    }
  }
  auto digits = std::make_shared<std::vector<Digit>>();
  std::vector<std::uint32_t> out_radices;
  for (std::size_t q : query_slots) {
    digits->push_back(slot_digit(slots[q]));
    out_radices.push_back(digits->back().radix);
  }
  Digit leaf;
  leaf.radix = leaf_rule.child_states();
  leaf.is_leaf = true;
  digits->push_back(leaf);
  out_radices.push_back(leaf.radix);
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!is_query[i]) {
      rest.push_back(i);
      digits->push_back(slot_digit(slots[i]));
    }
  }
  std::vector<EliminationStep> steps;
  for (std::size_t i = rest.size(); i-- > 0;) {
    const Slot& s = slots[rest[i]];
    steps.push_back({static_cast<std::uint32_t>(s.decode.total()), s.marginal});
  }
  SlotRuleSource source(leaf_rule, digits);
  const CompressedTable t = reduce_trailing(source, steps, options, stats);
  return ConditionalTable{query_slots, RadixVector(out_radices), decompress(t)};
}

Distribution marginalize_keep(const Distribution& d, const std::vector<std::string>& keep) {
  const std::size_t n = d.labels.size();
  if (d.radices.size() != n || d.values.size() != d.radices.total()) {
    throw DomainError("distribution labels, radices and values disagree");
  }
  std::vector<std::size_t> perm;
  std::vector<bool> used(n, false);
  for (const auto& name : keep) {
    const auto it = std::find(d.labels.begin(), d.labels.end(), name);
    if (it == d.labels.end()) throw DomainError("unknown node '" + name + "' in marginalization");
    const auto i = static_cast<std::size_t>(it - d.labels.begin());
    if (used[i]) throw DomainError("node '" + name + "' kept twice");
    used[i] = true;
    perm.push_back(i);
  }
  std::vector<EliminationStep> steps;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) perm.push_back(i);
  }
  for (std::size_t j = n; j-- > keep.size();) steps.push_back({d.radices.radix(perm[j]), {}});
  const CompressedTable reordered = reorder(compress(d.values), d.radices, perm);
  std::vector<double> dense = decompress(reordered);
  const CompressedTable t = reduce_trailing(VectorSource(std::move(dense)), steps);
  Distribution out;
  std::vector<std::uint32_t> radices;
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.labels.push_back(d.labels[perm[j]]);
    radices.push_back(d.radices.radix(perm[j]));
  }
  out.radices = RadixVector(radices);
  out.values = decompress(t);
  return out;
}

namespace {

struct LeafSetup {
  Partition partition;
  std::vector<Slot> slots;
  std::vector<std::size_t> slot_of_node;  // leaf parent -> slot index (npos if none)
  std::vector<std::size_t> block_of_node; // block child -> block index
  std::vector<Distribution> joints;
};

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

LeafSetup setup_leaf(const SystemModel& model, const ReduceOptions& options, ReduceStats& largest) {
  LeafSetup ls;
  const NodeId leaf = model.leaf();
  ls.partition = find_blocks(model);
  ls.slot_of_node.assign(model.size(), kNone);
  ls.block_of_node.assign(model.size(), kNone);
  const auto& lp = model.parents(leaf);
  auto position = [&](NodeId n) {
    return static_cast<std::size_t>(std::find(lp.begin(), lp.end(), n) - lp.begin());
  };
  for (NodeId n : ls.partition.independent_nodes) {
    Slot s;
    s.label = model.node(n).name;
    s.marginal = model.marginal(n);
    s.members = {position(n)};
    s.decode = RadixVector({model.states(n)});
    ls.slot_of_node[n] = ls.slots.size();
    ls.slots.push_back(std::move(s));
  }
  for (std::size_t b = 0; b < ls.partition.blocks.size(); ++b) {
    const Block& block = ls.partition.blocks[b];
    ReduceStats st;
    Distribution joint = block_joint(block, model, options, &st);
    keep_largest(largest, st);
    const EquivalentNode eq = equivalent_node(block, model, joint.values);
    Slot s;
    s.label = eq.node.name;
    s.marginal = eq.marginal;
    for (NodeId c : block.children) {
      s.members.push_back(position(c));
      ls.block_of_node[c] = b;
    }
    s.decode = eq.decode;
    for (NodeId c : block.children) ls.slot_of_node[c] = ls.slots.size();
    ls.slots.push_back(std::move(s));
    ls.joints.push_back(std::move(joint));
  }
  return ls;
}

// Extended-query path: Pr(S | Q) = Pr(S, Q) / Pr(Q).
std::vector<double> extended_query(const SystemModel& model, const LeafSetup& ls,
                                   const Assignment& q_indep, const Assignment& q_children,
                                   const ReduceOptions& options, ReduceStats& largest) {
  const NodeId leaf = model.leaf();
  const std::uint32_t leaf_states = model.states(leaf);
  std::map<NodeId, State> target;
  for (auto [n, s] : q_indep) target[n] = s;
  for (auto [n, s] : q_children) target[n] = s;

  // Q' = independent query slots, then whole blocks holding a queried child.
  std::vector<std::size_t> qprime;
  for (auto [n, s] : q_indep) qprime.push_back(ls.slot_of_node[n]);
  std::sort(qprime.begin(), qprime.end());
  std::vector<std::size_t> blocks;
  for (auto [n, s] : q_children) blocks.push_back(ls.block_of_node[n]);
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  const std::size_t n_indep_slots = ls.partition.independent_nodes.size();
  for (std::size_t b : blocks) qprime.push_back(n_indep_slots + b);

  ReduceStats st;
  ConditionalTable cond = independent_infer(model.rule(leaf), ls.slots, qprime, options, &st);
  keep_largest(largest, st);

  // Pr(S, Q') = Pr(S | Q') Pr(Q'), slots independent.
  {
    Odometer odo(cond.radices);
    for (double& v : cond.values) {
      double w = 1.0;
      for (std::size_t i = 0; i < qprime.size(); ++i) w *= ls.slots[qprime[i]].marginal[odo.digit(i)];
      v *= w;
      odo.advance();
    }
  }

  // Child granularity: an equivalent node's state spells out its members.
  std::vector<NodeId> expanded;
  std::vector<std::uint32_t> radices;
  for (std::size_t q : qprime) {
    if (q < n_indep_slots) {
      expanded.push_back(ls.partition.independent_nodes[q]);
    } else {
      for (NodeId c : ls.partition.blocks[q - n_indep_slots].children) expanded.push_back(c);
    }
  }
  for (NodeId n : expanded) radices.push_back(model.states(n));
  radices.push_back(leaf_states);
  const RadixVector full(radices);

  std::vector<std::size_t> perm;
  std::vector<State> states;
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    auto it = target.find(expanded[i]);
    if (it != target.end()) {
      perm.push_back(i);
      states.push_back(it->second);
    }
  }
  const std::size_t n_kept = perm.size();
  perm.push_back(expanded.size());
  std::vector<EliminationStep> steps;
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    if (!target.count(expanded[i])) perm.push_back(i);
  }
  for (std::size_t j = perm.size(); j-- > n_kept + 1;) steps.push_back({full.radix(perm[j]), {}});
  const CompressedTable joint_ct = reorder(compress(cond.values), full, perm);
  std::vector<double> dense = decompress(joint_ct);
  const CompressedTable sq = reduce_trailing(VectorSource(std::move(dense)), steps, options);
  std::vector<std::uint32_t> kept_radices;
  for (std::size_t j = 0; j <= n_kept; ++j) kept_radices.push_back(full.radix(perm[j]));
  const RadixVector kept_rv(kept_radices);
  const std::vector<double> sq_values = decompress(sq);

  // Pr(Q): independent marginals times each block's queried-children marginal.
  double pr_q = 1.0;
  for (auto [n, s] : q_indep) pr_q *= model.marginal(n)[s - 1];
  for (std::size_t b : blocks) {
    std::vector<std::string> keep;
    std::vector<State> keep_states;
    for (NodeId c : ls.partition.blocks[b].children) {
      auto it = target.find(c);
      if (it != target.end()) {
        keep.push_back(model.node(c).name);
        keep_states.push_back(it->second);
      }
    }
    const Distribution m = marginalize_keep(ls.joints[b], keep);
    pr_q *= m.at(keep_states);
  }
  if (!(pr_q > 0.0)) {
    std::string q;
    for (auto [n, s] : target) q += (q.empty() ? "" : ",") + describe(model, n, s);
    throw UndefinedConditionalError("Pr(" + q + ") = 0; the conditional is undefined");
  }
  std::vector<double> out(leaf_states);
  std::vector<State> full_states = states;
  full_states.push_back(1);
  for (std::uint32_t s = 0; s < leaf_states; ++s) {
    full_states.back() = s + 1;
    out[s] = sq_values[states_to_row(full_states, kept_rv) - 1] / pr_q;
  }
  return out;
}

}  // namespace

InferenceResult dependent_infer(const SystemModel& model_in, const QuerySpec& spec,
                                const InferenceOptions& options) {
  require_valid_structure(model_in);
  const NodeId leaf = model_in.leaf();
  check_spec(model_in, spec, leaf);
  SystemModel model = model_in;

  std::vector<bool> leaf_parent(model.size(), false);
  for (NodeId p : model.parents(leaf)) leaf_parent[p] = true;

  auto fold_root = [&](NodeId n, State s) {
    if (!(model.marginal(n)[s - 1] > 0.0)) {
      throw UndefinedConditionalError("Pr(" + describe(model, n, s) + ") = 0; the conditional is undefined");
    }
    model = model.with_marginal(n, point_mass(model.states(n), s));
  };

  Assignment q_indep, q_children;
  for (auto [n, s] : spec.evidence) {
    if (model.is_root(n)) {
      fold_root(n, s);
    } else if (leaf_parent[n]) {
      q_children.emplace_back(n, s);
    } else {
      throw DomainError("evidence on '" + model.node(n).name + "' must target a root or a block child");
    }
  }
  for (auto [n, s] : spec.query) {
    if (model.is_root(n) && leaf_parent[n]) {
      q_indep.emplace_back(n, s);
    } else if (model.is_root(n)) {
      fold_root(n, s);
    } else if (leaf_parent[n]) {
      q_children.emplace_back(n, s);
    } else {
      throw DomainError("query on '" + model.node(n).name + "' must target a root or a block child");
    }
  }

  InferenceResult result;
  result.situation = spec.query.empty() && q_children.empty() ? 1 : (q_children.empty() ? 2 : 3);

  const LeafSetup ls = setup_leaf(model, options.reduce, result.largest);
  for (auto [n, s] : q_indep) {
    if (!(model.marginal(n)[s - 1] > 0.0)) {
      throw UndefinedConditionalError("Pr(" + describe(model, n, s) + ") = 0; the conditional is undefined");
    }
  }

  std::vector<double> raw;
  if (result.situation == 3 || options.force_extended_query) {
    raw = extended_query(model, ls, q_indep, q_children, options.reduce, result.largest);
  } else {
    std::vector<std::size_t> qslots;
    std::vector<std::pair<std::size_t, State>> by_slot;
    for (auto [n, s] : q_indep) by_slot.emplace_back(ls.slot_of_node[n], s);
    std::sort(by_slot.begin(), by_slot.end());
    std::vector<State> states;
    for (auto [slot, s] : by_slot) {
      qslots.push_back(slot);
      states.push_back(s);
    }
    ReduceStats st;
    const ConditionalTable t = independent_infer(model.rule(leaf), ls.slots, qslots, options.reduce, &st);
    keep_largest(result.largest, st);
    const std::uint32_t leaf_states = model.states(leaf);
    raw.resize(leaf_states);
    states.push_back(1);
    for (std::uint32_t s = 0; s < leaf_states; ++s) {
      states.back() = s + 1;
      raw[s] = t.values[states_to_row(states, t.radices) - 1];
    }
  }

  double mass = 0.0;
  for (double v : raw) mass += v;
  result.mass = mass;
  if (!(std::abs(mass - 1.0) <= 1e-9)) {
    throw NumericError("Pr(" + model.node(leaf).name + " | Q, E) has mass " + std::to_string(mass) +
                       " before normalization");
  }
  for (double& v : raw) v /= mass;
  result.distribution.labels = {model.node(leaf).name};
  result.distribution.radices = RadixVector({model.states(leaf)});
  result.distribution.values = std::move(raw);
  result.distribution.check_normalized(1e-9, "Pr(" + model.node(leaf).name + ")");
  return result;
}

}  // namespace relcomp
