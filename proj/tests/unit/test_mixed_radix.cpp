#include <gtest/gtest.h>

#include <random>

#include "relcomp/error.hpp"
#include "relcomp/mixed_radix.hpp"

using namespace relcomp;

TEST(RadixVector, TotalAndStrides) {
  RadixVector rv({3, 2, 4});
  EXPECT_EQ(rv.total(), 24u);
  EXPECT_EQ(rv.stride(2), 1u);
  EXPECT_EQ(rv.stride(1), 4u);
  EXPECT_EQ(rv.stride(0), 8u);
  EXPECT_EQ(RadixVector().total(), 1u);
}

TEST(RadixVector, RejectsBadRadices) {
  EXPECT_THROW(RadixVector({2, 1}), DomainError);
  EXPECT_THROW(RadixVector(std::vector<std::uint32_t>(65, 2)), DomainError);
}

TEST(RadixVector, RightmostVariesFastest) {
  RadixVector rv({2, 3});
  EXPECT_EQ(row_to_states(1, rv), (std::vector<State>{1, 1}));
  EXPECT_EQ(row_to_states(2, rv), (std::vector<State>{1, 2}));
  EXPECT_EQ(row_to_states(4, rv), (std::vector<State>{2, 1}));
  EXPECT_EQ(row_to_states(6, rv), (std::vector<State>{2, 3}));
  EXPECT_THROW(row_to_states(0, rv), DomainError);
  EXPECT_THROW(row_to_states(7, rv), DomainError);
}

TEST(RadixVector, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> r(1 + rng() % 5);
    for (auto& x : r) x = 2 + rng() % 4;
    RadixVector rv(r);
    for (std::uint64_t k = 1; k <= rv.total(); ++k) {
      const auto s = row_to_states(k, rv);
      ASSERT_EQ(states_to_row(s, rv), k);
    }
  }
}

TEST(RadixVector, EncodeRejectsOutOfRange) {
  RadixVector rv({2, 3});
  const std::vector<State> bad{3, 1};
  EXPECT_THROW(states_to_row(bad, rv), DomainError);
  const std::vector<State> zero{1, 0};
  EXPECT_THROW(states_to_row(zero, rv), DomainError);
  const std::vector<State> short_list{1};
  EXPECT_THROW(states_to_row(short_list, rv), DomainError);
}

TEST(RadixVector, PermutedAndSlice) {
  RadixVector rv({2, 3, 4});
  const std::vector<std::size_t> perm{2, 0, 1};
  EXPECT_EQ(rv.permuted(perm).radices(), (std::vector<std::uint32_t>{4, 2, 3}));
  EXPECT_EQ(rv.slice(1, 2).radices(), (std::vector<std::uint32_t>{3, 4}));
  const std::vector<std::size_t> dup{0, 0, 1};
  EXPECT_THROW(rv.permuted(dup), DomainError);
  EXPECT_THROW(check_permutation(dup, 3), DomainError);
}

TEST(Odometer, AdvanceReportsLeftmostChangedDigit) {
  RadixVector rv({2, 3});
  Odometer od(rv);
  EXPECT_EQ(od.advance(), 1u);  // (0,1)
  EXPECT_EQ(od.advance(), 1u);  // (0,2)
  EXPECT_EQ(od.advance(), 0u);  // (1,0)
  EXPECT_EQ(od.digit(0), 1u);
  EXPECT_EQ(od.digit(1), 0u);
  od.advance();
  od.advance();
  EXPECT_EQ(od.advance(), 2u);  // wrapped
  EXPECT_EQ(od.digit(0), 0u);
}

TEST(Odometer, SeekMatchesDecoding) {
  RadixVector rv({3, 2, 5});
  Odometer od(rv);
  for (std::uint64_t row = 0; row < rv.total(); ++row) {
    od.seek(row);
    const auto s = row_to_states(row + 1, rv);
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_EQ(od.digit(i) + 1, s[i]);
  }
}

TEST(Odometer, OrderMatchesRowEnumeration) {
  RadixVector rv({2, 2, 3});
  Odometer od(rv);
  for (std::uint64_t k = 1; k <= rv.total(); ++k) {
    const auto s = row_to_states(k, rv);
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_EQ(od.digit(i) + 1, s[i]);
    od.advance();
  }
}
