#include "relcomp/oracle.hpp"

#include <cmath>
#include <random>
#include <thread>

#include "relcomp/error.hpp"

namespace relcomp {

DenseJoint enumerate_joint(const SystemModel& model) {
  const std::uint64_t size = model.joint_size();
  if (size > kOracleLimit) {
    throw ModelError("joint has " + std::to_string(size) + " states; enumeration is limited to " +
                     std::to_string(kOracleLimit));
  }
  std::vector<std::uint32_t> radices;
  for (const Node& n : model.nodes()) radices.push_back(n.state_count);
  DenseJoint joint{RadixVector(radices), std::vector<double>(size)};
  const std::size_t n = model.size();
  std::vector<std::unique_ptr<RuleCursor>> cursors(n);
  // feeds[p] = (child, position) pairs where p is a parent
  std::vector<std::vector<std::pair<NodeId, std::size_t>>> feeds(n);
  for (NodeId c = 0; c < n; ++c) {
    if (model.is_root(c)) continue;
    cursors[c] = model.rule(c).cursor();
    const auto& ps = model.parents(c);
    for (std::size_t i = 0; i < ps.size(); ++i) feeds[ps[i]].push_back({c, i});
  }
  Odometer odo(joint.radices);
  auto apply = [&](std::size_t j) {
    for (auto [c, pos] : feeds[j]) cursors[c]->set(pos, odo.digit(j));
  };
  for (std::size_t j = 0; j < n; ++j) apply(j);
  for (std::uint64_t row = 0; row < size; ++row) {
    double v = 1.0;
    for (NodeId i = 0; i < n && v != 0.0; ++i) {
      v *= model.is_root(i) ? model.marginal(i)[odo.digit(i)] : cursors[i]->probability(odo.digit(i));
    }
    joint.values[row] = v;
    const std::size_t changed = odo.advance();
    for (std::size_t j = changed; j < n; ++j) apply(j);
  }
  return joint;
}

Distribution oracle_conditional(const DenseJoint& joint, const SystemModel& model, NodeId target,
                                const Assignment& conditions) {
  const std::uint32_t ts = model.states(target);
  std::vector<double> acc(ts, 0.0);
  Odometer odo(joint.radices);
  for (double v : joint.values) {
    bool match = true;
    for (auto [n, s] : conditions) {
      if (odo.digit(n) + 1 != s) {
        match = false;
        break;
      }
    }
    if (match) acc[odo.digit(target)] += v;
    odo.advance();
  }
  double mass = 0.0;
  for (double v : acc) mass += v;
  if (!(mass > 0.0)) {
    throw UndefinedConditionalError("conditioning event has probability 0");
  }
  for (double& v : acc) v /= mass;
  return Distribution{{model.node(target).name}, RadixVector({ts}), std::move(acc)};
}

Distribution oracle_infer(const SystemModel& model, const QuerySpec& spec) {
  Assignment all = spec.query;
  all.insert(all.end(), spec.evidence.begin(), spec.evidence.end());
  return oracle_conditional(enumerate_joint(model), model, model.leaf(), all);
}

namespace {

constexpr unsigned kShards = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint32_t sample_categorical(const double* p, std::uint32_t n, double u) {
  double c = 0.0;
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    c += p[i];
    if (u < c) return i;
  }
  return n - 1;
}

}  // namespace

MonteCarloResult monte_carlo(const SystemModel& model, std::uint64_t samples, std::uint64_t seed,
                             unsigned threads) {
  if (samples < 1) throw DomainError("monte_carlo needs at least one sample");
  const NodeId leaf = model.leaf();
  const std::uint32_t leaf_states = model.states(leaf);
  const auto& order = model.topological_order();
  std::vector<std::vector<std::uint64_t>> strides(model.size());
  for (NodeId c = 0; c < model.size(); ++c) {
    if (model.is_root(c)) continue;
    const RadixVector& rv = model.rule(c).parents();
    for (std::size_t i = 0; i < rv.size(); ++i) strides[c].push_back(rv.stride(i));
  }

  std::vector<std::vector<std::uint64_t>> tallies(kShards, std::vector<std::uint64_t>(leaf_states, 0));
  auto run_shard = [&](unsigned shard) {
    const std::uint64_t count = samples / kShards + (shard < samples % kShards ? 1 : 0);
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(shard + 1)));
    std::vector<std::uint32_t> state(model.size(), 0);
    std::vector<State> args;
    for (std::uint64_t k = 0; k < count; ++k) {
      for (NodeId n : order) {
        if (model.is_root(n)) {
          const auto& m = model.marginal(n);
          state[n] = sample_categorical(m.data(), model.states(n), uniform01(rng));
          continue;
        }
        const Rule& r = model.rule(n);
        const auto& ps = model.parents(n);
        if (r.kind() == Rule::Kind::kComposite) {
          args.clear();
          for (NodeId p : ps) args.push_back(state[p] + 1);
          state[n] = r.deterministic_state(args) - 1;
          continue;
        }
        std::uint64_t row = 0;
        for (std::size_t i = 0; i < ps.size(); ++i) row += state[ps[i]] * strides[n][i];
        if (r.kind() == Rule::Kind::kDeterministic) {
          state[n] = r.lookup()[row];
        } else {
          const std::uint32_t cs = r.child_states();
          state[n] = sample_categorical(r.table_values().data() + row * cs, cs, uniform01(rng));
        }
      }
      ++tallies[shard][state[leaf]];
    }
  };
  const unsigned workers = std::max(1u, std::min(threads, kShards));
  if (workers == 1) {
    for (unsigned s = 0; s < kShards; ++s) run_shard(s);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (unsigned s = w; s < kShards; s += workers) run_shard(s);
      });
    }
    for (auto& t : pool) t.join();
  }
  MonteCarloResult res;
  res.samples = samples;
  std::vector<std::uint64_t> total(leaf_states, 0);
  for (const auto& t : tallies) {
    for (std::uint32_t s = 0; s < leaf_states; ++s) total[s] += t[s];
  }
  const double n = static_cast<double>(samples);
  for (std::uint32_t s = 0; s < leaf_states; ++s) {
    const double p = static_cast<double>(total[s]) / n;
    res.estimate.push_back(p);
    res.std_error.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  return res;
}

}  // namespace relcomp
