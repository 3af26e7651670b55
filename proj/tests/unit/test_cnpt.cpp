#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <sstream>

#include "random_models.hpp"
#include "relcomp/cnpt.hpp"
#include "relcomp/error.hpp"

using namespace relcomp;
using relcomp::testing::Rng;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] + 0.0, y = b[i] + 0.0;
    if (std::bit_cast<std::uint64_t>(x) != std::bit_cast<std::uint64_t>(y)) return false;
  }
  return true;
}

std::vector<Segment> segments(const CompressedTable& ct) {
  std::vector<Segment> out;
  for (std::size_t j = 0; j < ct.rows().size(); ++j) out.push_back(ct.segment(j));
  return out;
}

}  // namespace

TEST(Cnpt, GreedyScannerShapes) {
  {
    const auto ct = compress(std::vector<double>{0.5, 0.2, 0.2, 0.2});
    const auto s = segments(ct);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_TRUE(s[0].phrase);
    EXPECT_EQ(s[0].v1, 0.5);
    EXPECT_EQ(s[0].v2, 0.2);
    EXPECT_EQ(s[0].length, 4u);
  }
  {
    const auto ct = compress(std::vector<double>{0.5, 0.5, 0.2});
    const auto s = segments(ct);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_FALSE(s[0].phrase);
    EXPECT_EQ(s[0].length, 2u);
    EXPECT_FALSE(s[1].phrase);
    EXPECT_EQ(s[1].length, 1u);
  }
  {
    const auto ct = compress(std::vector<double>{0.1, 0.2, 0.3, 0.3});
    const auto s = segments(ct);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_FALSE(s[0].phrase);
    EXPECT_TRUE(s[1].phrase);
    EXPECT_EQ(s[1].length, 3u);
  }
  {
    // identical adjacent phrases fold into one row with count 2
    const auto ct = compress(std::vector<double>{1, 0, 0, 1, 0, 0});
    ASSERT_EQ(ct.rows().size(), 1u);
    EXPECT_EQ(ct.rows()[0].count, 2u);
    EXPECT_EQ(ct.phrases().size(), 1u);
  }
  {
    // equal non-adjacent segments share one dictionary entry
    const auto ct = compress(std::vector<double>{7, 7, 3, 3, 7, 7});
    EXPECT_EQ(ct.rows().size(), 3u);
    EXPECT_EQ(ct.runs().size(), 2u);
    EXPECT_EQ(ct.run_refs()[ct.rows()[0].id], (std::vector<std::uint64_t>{1, 5}));
  }
}

TEST(Cnpt, NegativeZeroIsNormalized) {
  const auto ct = compress(std::vector<double>{-0.0, 0.0, 0.0});
  ASSERT_EQ(ct.rows().size(), 1u);
  EXPECT_FALSE(std::signbit(decompress(ct)[0]));
}

TEST(Cnpt, StartOffsetsAndRefs) {
  const auto ct = compress(std::vector<double>{1, 1, 2, 3, 3, 3, 4, 1, 1});
  ct.validate();
  const auto& s = ct.start_offsets();
  ASSERT_EQ(s.size(), ct.rows().size());
  std::uint64_t pos = 1;
  for (std::size_t j = 0; j < s.size(); ++j) {
    EXPECT_EQ(s[j], pos);
    pos += ct.row_length(j);
  }
  EXPECT_EQ(pos - 1, ct.total_len());
}

TEST(Cnpt, RandomRoundTripAndNeverInflates) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = relcomp::testing::uniform_int(rng, 1, 5000);
    const auto v = relcomp::testing::random_sequence(rng, n);
    const auto ct = compress(v);
    ASSERT_NO_THROW(ct.validate());
    ASSERT_TRUE(bit_equal(decompress(ct), v));
    EXPECT_LE(ct.rows().size(), n);
    EXPECT_LE(ct.runs().size() + ct.phrases().size(), n);
    for (int probe = 0; probe < 20; ++probe) {
      const std::uint64_t k = relcomp::testing::uniform_int(rng, 1, n);
      ASSERT_EQ(value_at(ct, k), v[k - 1] + 0.0);
    }
  }
}

TEST(Cnpt, StreamingMatchesBatch) {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = relcomp::testing::random_sequence(rng, relcomp::testing::uniform_int(rng, 1, 3000));
    const auto batch = compress(v);
    for (std::size_t chunk : {1u, 7u, 64u, 100000u}) {
      const auto streamed = compress_stream(
          v.size(), [&](std::uint64_t first, std::span<double> out) {
            std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(first), out.size(), out.begin());
          },
          chunk);
      ASSERT_EQ(streamed.rows().size(), batch.rows().size());
      ASSERT_TRUE(bit_equal(decompress(streamed), v));
    }
  }
}

TEST(Cnpt, MultiplicityConsumeEqualsRepeatedConsume) {
  TableBuilder a, b;
  StreamCompressor ca(a), cb(b);
  const std::vector<std::pair<double, std::uint64_t>> input{{1, 3}, {2, 1}, {2, 4}, {5, 1}, {1, 2}};
  for (auto [v, m] : input) {
    ca.consume(v, m);
    for (std::uint64_t i = 0; i < m; ++i) cb.consume(v, 1);
  }
  ca.finish();
  cb.finish();
  EXPECT_EQ(ca.consumed(), 11u);
  EXPECT_TRUE(bit_equal(decompress(a.take()), decompress(b.take())));
}

TEST(Cnpt, Errors) {
  const std::vector<double> v{1, 2, 3};
  EXPECT_THROW(compress(v, 4), IntegrityError);
  const auto ct = compress(v);
  EXPECT_THROW(value_at(ct, 0), DomainError);
  EXPECT_THROW(value_at(ct, 4), DomainError);
  EXPECT_THROW(CompressedTable::from_parts({{1.0, 2}}, {}, {{false, 3, 1}}), IntegrityError);
  EXPECT_THROW(CompressedTable::from_parts({{1.0, 2}}, {}, {{false, 0, 0}}), IntegrityError);
  EXPECT_THROW(CompressedTable::from_parts({{1.0, 0}}, {}, {{false, 0, 1}}), IntegrityError);
  const auto ok = CompressedTable::from_parts({{1.0, 2}}, {{0.5, 0.25, 3}}, {{true, 0, 2}, {false, 0, 1}});
  EXPECT_EQ(decompress(ok), (std::vector<double>{0.5, 0.25, 0.25, 0.5, 0.25, 0.25, 1.0, 1.0}));
}

TEST(Cnpt, BinaryDumpLoad) {
  Rng rng(13);
  const auto v = relcomp::testing::random_sequence(rng, 2000);
  const auto ct = compress(v);
  std::stringstream buf;
  dump(ct, buf);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.substr(0, 4), "RCPT");
  std::stringstream in(bytes);
  const auto back = load(in);
  EXPECT_TRUE(bit_equal(decompress(back), v));
  EXPECT_EQ(back.start_offsets(), ct.start_offsets());

  std::stringstream bad_magic("XXXX" + bytes.substr(4));
  EXPECT_THROW(load(bad_magic), IntegrityError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load(truncated), IntegrityError);
  std::string tampered = bytes;
  tampered[bytes.size() - 1] ^= 0x01;  // last S^all entry
  std::stringstream t(tampered);
  EXPECT_THROW(load(t), IntegrityError);
}
