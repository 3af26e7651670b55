#include <gtest/gtest.h>

#include <cmath>

#include "random_models.hpp"
#include "relcomp/error.hpp"
#include "relcomp/model_io.hpp"
#include "relcomp/oracle.hpp"

using namespace relcomp;

namespace {

SystemModel two_coins_and() {
  ModelBuilder b;
  const NodeId a = b.add_node("A", 2), c = b.add_node("B", 2), s = b.add_node("S", 2);
  b.set_marginal(a, {0.3, 0.7}).set_marginal(c, {0.4, 0.6});
  b.set_rule(s, {a, c}, make_builtin_rule("series", RadixVector({2, 2}), 2));
  return b.build();
}

}  // namespace

TEST(Oracle, TwoCoinsJointIsProducts) {
  const SystemModel m = two_coins_and();
  const DenseJoint j = enumerate_joint(m);
  ASSERT_EQ(j.values.size(), 8u);
  const double pa[] = {0.3, 0.7}, pb[] = {0.4, 0.6};
  for (std::uint64_t k = 1; k <= 8; ++k) {
    const auto s = row_to_states(k, j.radices);
    const bool works = s[0] == 2 && s[1] == 2;
    const double leaf = (s[2] == 2) == works ? 1.0 : 0.0;
    EXPECT_DOUBLE_EQ(j.values[k - 1], pa[s[0] - 1] * pb[s[1] - 1] * leaf);
  }
  const auto d = oracle_infer(m, {});
  EXPECT_NEAR(d.values[1], 0.42, 1e-15);
}

TEST(Oracle, ChainConditional) {
  ModelBuilder b;
  const NodeId a = b.add_node("A", 2), s = b.add_node("S", 2);
  b.set_marginal(a, {0.2, 0.8});
  b.set_rule(s, {a}, Rule::table(RadixVector({2}), 2, {0.9, 0.1, 0.3, 0.7}));
  const SystemModel m = b.build();
  const auto j = enumerate_joint(m);
  EXPECT_NEAR(oracle_conditional(j, m, s, {}).values[0], 0.2 * 0.9 + 0.8 * 0.3, 1e-15);
  EXPECT_NEAR(oracle_conditional(j, m, s, {{a, 1}}).values[0], 0.9, 1e-15);
  const auto back = oracle_conditional(j, m, a, {{s, 2}});
  EXPECT_NEAR(back.values[1], 0.8 * 0.7 / (0.2 * 0.1 + 0.8 * 0.7), 1e-15);
  EXPECT_THROW(oracle_conditional(j, m, s, {{a, 1}, {a, 2}}), UndefinedConditionalError);
}

TEST(Oracle, SizeGuard) {
  ModelBuilder b;
  std::vector<NodeId> ps;
  for (int i = 0; i < 24; ++i) {
    const NodeId n = b.add_node("n" + std::to_string(i), 2);
    b.set_marginal(n, {0.5, 0.5});
    ps.push_back(n);
  }
  const NodeId s = b.add_node("S", 2);
  b.set_rule(s, ps, make_builtin_rule("k_of_n", RadixVector(std::vector<std::uint32_t>(24, 2)), 2, {{"k", 12}}));
  EXPECT_THROW(enumerate_joint(b.build()), ModelError);
}

TEST(MonteCarlo, DeterministicModelIsExact) {
  ModelBuilder b;
  const NodeId a = b.add_node("A", 2), c = b.add_node("B", 2), s = b.add_node("S", 3);
  b.set_marginal(a, {0.0, 1.0}).set_marginal(c, {1.0, 0.0});
  b.set_rule(s, {a, c}, make_builtin_rule("hot_standby", RadixVector({2, 2}), 3));
  const auto r = monte_carlo(b.build(), 5000, 1);
  EXPECT_EQ(r.estimate, (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_EQ(r.std_error, (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(r.samples, 5000u);
}

TEST(MonteCarlo, ReproducibleAndThreadIndependent) {
  const SystemModel m = load_model(std::string(RELCOMP_SOURCE_DIR) + "/models/case1_pitch_axis.json");
  const auto a = monte_carlo(m, 100000, 99, 1);
  const auto b = monte_carlo(m, 100000, 99, 4);
  const auto c = monte_carlo(m, 100000, 100, 1);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_NE(a.estimate, c.estimate);
}

TEST(MonteCarlo, ErrorShrinksLikeInverseRootN) {
  const SystemModel m = load_model(std::string(RELCOMP_SOURCE_DIR) + "/models/case1_pitch_axis.json");
  const auto exact = oracle_infer(m, {}).values;
  std::vector<double> rms;
  for (std::uint64_t n : {1000ull, 10000ull, 100000ull, 1000000ull}) {
    double acc = 0.0;
    const int reps = 8;
    for (int rep = 0; rep < reps; ++rep) {
      const auto r = monte_carlo(m, n, 1000 + rep);
      double e = 0.0;
      for (std::size_t s = 0; s < exact.size(); ++s) {
        e += (r.estimate[s] - exact[s]) * (r.estimate[s] - exact[s]);
        EXPECT_LE(std::abs(r.estimate[s] - exact[s]), 5.0 * std::max(r.std_error[s], 1e-12) + 1e-12);
      }
      acc += e;
    }
    rms.push_back(std::sqrt(acc / reps));
  }
  // each decade of n should cut the error by about sqrt(10) ~ 3.16
  for (std::size_t i = 1; i < rms.size(); ++i) {
    const double ratio = rms[i - 1] / rms[i];
    EXPECT_GT(ratio, 1.5) << "decade " << i;
    EXPECT_LT(ratio, 7.0) << "decade " << i;
  }
}

TEST(MonteCarlo, RejectsZeroSamples) { EXPECT_THROW(monte_carlo(two_coins_and(), 0, 1), DomainError); }
