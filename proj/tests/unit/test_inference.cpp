#include <gtest/gtest.h>

#include <array>
#include <optional>

#include "random_models.hpp"
#include "relcomp/error.hpp"
#include "relcomp/inference.hpp"
#include "relcomp/model_io.hpp"
#include "relcomp/oracle.hpp"

using namespace relcomp;
using relcomp::testing::Rng;
using relcomp::testing::uniform_int;

namespace {

SystemModel load(const char* name) { return load_model(std::string(RELCOMP_SOURCE_DIR) + "/models/" + name); }

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "state " << i + 1;
}

QuerySpec spec(const SystemModel& m, const std::string& q, const std::string& e = "") {
  return {q.empty() ? Assignment{} : parse_assignment(m, q), e.empty() ? Assignment{} : parse_assignment(m, e)};
}

}  // namespace

TEST(Inference, ParseAssignment) {
  const SystemModel m = load("case1_pitch_axis.json");
  const auto a = parse_assignment(m, "SM=3, DF=2");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0], std::make_pair(m.id_of("SM"), State{3}));
  EXPECT_THROW(parse_assignment(m, "XX=1"), DomainError);
  EXPECT_THROW(parse_assignment(m, "SM=4"), DomainError);
  EXPECT_THROW(parse_assignment(m, "SM=0"), DomainError);
  EXPECT_THROW(parse_assignment(m, "SM"), DomainError);
  EXPECT_THROW(parse_assignment(m, "SM=x"), DomainError);
  EXPECT_THROW(infer(m, spec(m, "SM=1", "SM=2")), DomainError);
  EXPECT_THROW(infer(m, spec(m, "PAS=1")), DomainError);
}

TEST(Inference, CaseOneMatchesEnumeration) {
  const SystemModel m = load("case1_pitch_axis.json");
  for (const char* q : {"", "SM=3", "DF=2", "HR=2", "SM=3,DF=2", "SM=3,HR=2", "DF=2,HR=2", "C=2", "DF=1"}) {
    SCOPED_TRACE(q);
    const QuerySpec s = spec(m, q);
    const InferenceResult r = infer(m, s);
    expect_close(r.distribution.values, oracle_infer(m, s).values, 1e-12);
    EXPECT_NEAR(r.distribution.sum(), 1.0, 1e-12);
  }
  EXPECT_EQ(infer(m, spec(m, "SM=3")).distribution.values[1], 0.0);
  EXPECT_EQ(infer(m, spec(m, "")).situation, 1);
  EXPECT_EQ(infer(m, spec(m, "SM=3")).situation, 2);
  EXPECT_EQ(infer(m, spec(m, "DF=2")).situation, 3);
}

TEST(Inference, CaseOneBlockJoint) {
  const SystemModel m = load("case1_pitch_axis.json");
  const Partition p = find_blocks(m);
  const Distribution dh = block_joint(p.blocks[0], m);
  const DenseJoint joint = enumerate_joint(m);
  const NodeId df = m.id_of("DF"), hr = m.id_of("HR");
  for (State a = 1; a <= 2; ++a) {
    const Distribution cond = oracle_conditional(joint, m, hr, {{df, a}});
    const Distribution df_marg = oracle_conditional(joint, m, df, {});
    for (State b = 1; b <= 2; ++b) {
      const std::vector<State> st{a, b};
      EXPECT_NEAR(dh.at(st), df_marg.values[a - 1] * cond.values[b - 1], 1e-15);
    }
  }
}

TEST(Inference, ExtendedQueryPathAgrees) {
  const SystemModel m = load("case1_pitch_axis.json");
  InferenceOptions forced;
  forced.force_extended_query = true;
  for (const char* q : {"", "SM=2", "C=1"}) {
    const QuerySpec s = spec(m, q);
    expect_close(infer(m, s, forced).distribution.values, infer(m, s).distribution.values, 1e-13);
  }
}

TEST(Inference, ZeroProbabilityConditioning) {
  ModelBuilder b;
  const NodeId a = b.add_node("A", 2), x = b.add_node("X", 2), s = b.add_node("S", 2);
  b.set_marginal(a, {0.0, 1.0});
  b.set_rule(x, {a}, Rule::table(RadixVector({2}), 2, {0.5, 0.5, 1.0, 0.0}));
  b.set_rule(s, {x}, Rule::table(RadixVector({2}), 2, {1, 0, 0, 1}));
  const SystemModel m = b.build();
  EXPECT_THROW(infer(m, spec(m, "A=1")), UndefinedConditionalError);
  EXPECT_THROW(infer(m, spec(m, "", "X=2")), UndefinedConditionalError);
  EXPECT_THROW(oracle_infer(m, spec(m, "A=1")), UndefinedConditionalError);
  expect_close(infer(m, spec(m, "X=1")).distribution.values, {1.0, 0.0}, 0.0);
}

TEST(Inference, RandomDependentModelsMatchEnumeration) {
  Rng rng(51);
  std::array<int, 4> seen{};
  for (int trial = 0; trial < 90; ++trial) {
    SCOPED_TRACE(trial);
    const SystemModel m = relcomp::testing::random_dependent_model(rng, {.max_joint = 20000});
    const QuerySpec s = relcomp::testing::random_query(rng, m, 1 + trial % 3);
    InferenceResult r;
    try {
      r = dependent_infer(m, s);
    } catch (const UndefinedConditionalError&) {
      EXPECT_THROW(oracle_infer(m, s), UndefinedConditionalError);
      continue;
    }
    ++seen[r.situation];
    expect_close(r.distribution.values, oracle_infer(m, s).values, 1e-12);
    r.distribution.check_normalized(1e-9);
  }
  EXPECT_GE(seen[1], 10);
  EXPECT_GE(seen[2], 10);
  EXPECT_GE(seen[3], 10);
}

TEST(Inference, ReduceOptionsDoNotChangeResults) {
  Rng rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const SystemModel m = relcomp::testing::random_dependent_model(rng, {.max_joint = 50000});
    const QuerySpec s = relcomp::testing::random_query(rng, m, 3);
    InferenceOptions staged, fused;
    staged.reduce.mode = ReduceMode::kStaged;
    fused.reduce.mode = ReduceMode::kFused;
    fused.reduce.threads = 2;
    fused.reduce.chunk = 3;
    try {
      expect_close(dependent_infer(m, s, staged).distribution.values,
                   dependent_infer(m, s, fused).distribution.values, 1e-13);
    } catch (const UndefinedConditionalError&) {
    }
  }
}

TEST(Inference, InvalidStructureIsRejected) {
  for (const auto& ce : relcomp::testing::structure_counterexamples()) {
    if (ce.condition == 1) continue;  // no unique leaf to ask about
    EXPECT_THROW(dependent_infer(ce.model, {}), ModelError);
  }
}

TEST(Multilevel, RandomTreesMatchEnumerationInBothModes) {
  Rng rng(53);
  int flat_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    SCOPED_TRACE(trial);
    const SystemModel m = relcomp::testing::random_multilevel_model(rng, 200000, trial % 2 == 0);
    const NodeId leaf = m.leaf();
    QuerySpec s;
    std::vector<NodeId> cand;
    for (NodeId n = 0; n < m.size(); ++n) {
      if (n != leaf) cand.push_back(n);
    }
    std::shuffle(cand.begin(), cand.end(), rng);
    const std::size_t nq = uniform_int(rng, 0, 2);
    for (std::size_t i = 0; i < nq && i < cand.size(); ++i) {
      s.query.emplace_back(cand[i], static_cast<State>(uniform_int(rng, 1, m.states(cand[i]))));
    }
    std::vector<double> expect;
    try {
      expect = oracle_infer(m, s).values;
    } catch (const UndefinedConditionalError&) {
      EXPECT_THROW(infer(m, s), UndefinedConditionalError);
      continue;
    }
    expect_close(infer(m, s).distribution.values, expect, 1e-12);
    InferenceOptions flat;
    flat.mode = InferenceMode::kFlat;
    std::optional<SystemModel> f;
    try {
      f = flatten(m);
    } catch (const ModelError&) {
      // composing the leaf needs a deterministic leaf rule
      EXPECT_FALSE(m.rule(leaf).is_deterministic());
      continue;
    }
    bool composed = false;
    for (auto [n, st] : s.query) composed = composed || !f->find(m.node(n).name);
    if (composed) {
      EXPECT_THROW(infer(m, s, flat), DomainError);
    } else {
      expect_close(infer(m, s, flat).distribution.values, expect, 1e-12);
      ++flat_checked;
    }
  }
  EXPECT_GE(flat_checked, 20);
}

TEST(Multilevel, CaseTwoTimeZeroIsFullyWorking) {
  for (const char* name : {"case2_independent.json", "case2_dependent.json"}) {
    const SystemModel m = load(name).at_time(0.0);
    const auto r = infer(m, {});
    // only the common-cause factors can degrade the dependent system at t = 0
    EXPECT_NEAR(r.distribution.sum(), 1.0, 1e-12);
    if (std::string(name) == "case2_independent.json") {
      expect_close(r.distribution.values, {0.0, 0.0, 0.0, 1.0}, 1e-15);
    }
  }
}

TEST(Multilevel, RejectsNonTreeModels) {
  ModelBuilder b;
  const NodeId r = b.add_node("R", 2);
  b.set_marginal(r, {0.4, 0.6});
  const Rule copy = Rule::table(RadixVector({2}), 2, {1, 0, 0, 1});
  const NodeId f = b.add_node("F", 2), u1 = b.add_node("U1", 2), u2 = b.add_node("U2", 2);
  b.set_rule(f, {r}, copy).set_rule(u1, {f}, copy).set_rule(u2, {f}, copy);
  const NodeId s = b.add_node("S", 2);
  b.set_rule(s, {u1, u2}, make_builtin_rule("series", RadixVector({2, 2}), 2));
  EXPECT_THROW(infer(b.build(), {}), ModelError);
}
