#include "relcomp/eliminate.hpp"

#include <string>

#include "relcomp/error.hpp"

namespace relcomp {

EliminationStage::EliminationStage(std::uint32_t width, std::span<const double> weights,
                                   ValueSink& out)
    : weighted_(!weights.empty()), out_(out) {
  if (width < 1) throw DomainError("elimination width must be >= 1");
  if (weighted_ && weights.size() != width) {
    throw DomainError("weight vector has " + std::to_string(weights.size()) +
                      " entries, node has " + std::to_string(width) + " states");
  }
  carry_.width = width;
  prefix_.resize(width + 1, 0.0);
  for (std::uint32_t i = 0; i < width; ++i) {
    prefix_[i + 1] = prefix_[i] + (weighted_ ? weights[i] : 1.0);
  }
  total_weight_ = prefix_[width];
}

void EliminationStage::classify(const Segment& s) {
  const std::uint64_t h = carry_.consumed;
  const std::uint64_t n = carry_.width;
  const std::uint64_t f = h + s.expanded();
  std::size_t fi;
  if (f < n) {
    fi = 0;
  } else if (f == n) {
    fi = 1;
  } else {
    fi = f - n < n ? 2 : 3;
  }
  const std::size_t hi = h == 0 ? 0 : (h == 1 ? 1 : 2);
  ++(s.phrase ? cases_.phrase : cases_.run)[hi][fi];
}

void EliminationStage::feed(double v, std::uint64_t m) {
  const std::uint64_t n = carry_.width;
  if (carry_.consumed > 0) {
    const std::uint64_t h = carry_.consumed;
    const std::uint64_t room = n - h;
    if (m < room) {
      carry_.partial += v * (prefix_[h + m] - prefix_[h]);
      carry_.consumed += m;
      return;
    }
    out_.consume(carry_.partial + v * (prefix_[n] - prefix_[h]), 1);
    carry_.partial = 0.0;
    carry_.consumed = 0;
    m -= room;
  }
  const std::uint64_t groups = m / n;
  if (groups > 0) out_.consume(v * total_weight_, groups);
  const std::uint64_t tail = m % n;
  if (tail > 0) {
    carry_.partial = v * prefix_[tail];
    carry_.consumed = tail;
  }
}

void EliminationStage::consume(const Segment& s) {
  ++rows_;
  classify(s);
  if (!s.phrase) {
    feed(s.v1, s.length * s.count);
    return;
  }
  for (std::uint64_t c = 0; c < s.count; ++c) {
    feed(s.v1, 1);
    feed(s.v2, s.length - 1);
  }
}

void EliminationStage::finish() {
  if (carry_.consumed != 0) {
    throw ModelError("table length is not a multiple of the eliminated node's " +
                     std::to_string(carry_.width) + " states");
  }
  out_.finish();
}

EliminateResult eliminate_last_traced(const CompressedTable& ct, std::uint32_t width,
                                      std::span<const double> weights) {
  if (width == 0 || ct.total_len() % width != 0) {
    throw ModelError("table length " + std::to_string(ct.total_len()) +
                     " is not divisible by " + std::to_string(width));
  }
  TableBuilder builder;
  StreamCompressor compressor(builder);
  EliminationStage stage(width, weights, compressor);
  ct.replay(stage);
  return EliminateResult{builder.take(), stage.cases()};
}

CompressedTable eliminate_last(const CompressedTable& ct, std::uint32_t width,
                               std::span<const double> weights) {
  return eliminate_last_traced(ct, width, weights).table;
}

CompressedTable eliminate_last_oracle(const CompressedTable& ct, std::uint32_t width,
                                      std::span<const double> weights) {
  if (width == 0 || ct.total_len() % width != 0) {
    throw ModelError("table length " + std::to_string(ct.total_len()) +
                     " is not divisible by " + std::to_string(width));
  }
  if (!weights.empty() && weights.size() != width) {
    throw DomainError("weight vector length mismatch");
  }
  const std::vector<double> dense = decompress(ct);
  std::vector<double> out(dense.size() / width, 0.0);
  for (std::size_t g = 0; g < out.size(); ++g) {
    double sum = 0.0;
    for (std::uint32_t x = 0; x < width; ++x) {
      sum += (weights.empty() ? 1.0 : weights[x]) * dense[g * width + x];
    }
    out[g] = sum;
  }
  return compress(out);
}

CompressedTable reorder_generate(const TableDescription& spec, std::span<const std::size_t> perm) {
  const std::size_t n = spec.radices.size();
  check_permutation(perm, n);
  const RadixVector out_rv = spec.radices.permuted(perm);
  Odometer odo(out_rv);
  std::vector<std::uint32_t> original(n, 0);
  TableBuilder builder;
  StreamCompressor compressor(builder);
  const std::uint64_t total = out_rv.total();
  for (std::uint64_t k = 0; k < total; ++k) {
    for (std::size_t i = 0; i < n; ++i) original[perm[i]] = odo.digit(i);
    compressor.consume(spec.value(original), 1);
    odo.advance();
  }
  compressor.finish();
  return builder.take();
}

CompressedTable reorder(const CompressedTable& ct, const RadixVector& radices,
                        std::span<const std::size_t> perm) {
  if (ct.total_len() != radices.total()) {
    throw DomainError("reorder: table length does not match the radices");
  }
  TableDescription spec{radices, [&](std::span<const std::uint32_t> s) {
                          std::uint64_t row = 0;
                          for (std::size_t i = 0; i < s.size(); ++i) row += s[i] * radices.stride(i);
                          return value_at(ct, row + 1);
                        }};
  return reorder_generate(spec, perm);
}

}  // namespace relcomp
