#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "relcomp/cnpt.hpp"
#include "relcomp/mixed_radix.hpp"

namespace relcomp {

/// In-progress output group while summing out the last node.
struct CarryState {
  std::uint64_t consumed = 0;  ///< values of the current group seen so far (H)
  double partial = 0.0;        ///< their weighted sum (R)
  std::uint32_t width = 0;     ///< state count of the eliminated node (N)
};

/// Row classification counters. Index [h][f] with h = carry class
/// (0: H = 0, 1: H = 1, 2: H > 1) and f = 0: F < N, 1: F = N,
/// 2: F > N with V < N, 3: F > N with V >= N, where H is the carry on
/// entry, F = H + row length and V = F - N. f = 3 is the case where one
/// input row closes the open group and emits at least one further whole
/// output group.
struct EliminationCases {
  std::array<std::array<std::uint64_t, 4>, 3> run{};
  std::array<std::array<std::uint64_t, 4>, 3> phrase{};
};

/// Streaming elimination of the fastest-varying node. Consumes the segments
/// of a table over [..., X] and emits the group sums per output entry.
class EliminationStage final : public SegmentSink {
 public:
  /// `weights` empty means all ones.
  EliminationStage(std::uint32_t width, std::span<const double> weights, ValueSink& out);

  void consume(const Segment& s) override;
  void finish() override;

  const CarryState& carry() const noexcept { return carry_; }
  const EliminationCases& cases() const noexcept { return cases_; }
  std::uint64_t rows_consumed() const noexcept { return rows_; }

 private:
  void feed(double v, std::uint64_t m);
  void classify(const Segment& s);

  CarryState carry_;
  std::vector<double> prefix_;  // prefix_[i] = w_0 + ... + w_{i-1}
  double total_weight_;
  bool weighted_;
  ValueSink& out_;
  EliminationCases cases_;
  std::uint64_t rows_ = 0;
};

struct EliminateResult {
  CompressedTable table;
  EliminationCases cases;
};

/// Sums out the last node (width N) of `ct`, optionally weighting state x
/// by weights[x]. Throws ModelError when N does not divide the length,
/// DomainError when weights has the wrong length.
CompressedTable eliminate_last(const CompressedTable& ct, std::uint32_t width,
                               std::span<const double> weights = {});
EliminateResult eliminate_last_traced(const CompressedTable& ct, std::uint32_t width,
                                      std::span<const double> weights = {});

/// Dense reference: decompress, group-sum, recompress.
CompressedTable eliminate_last_oracle(const CompressedTable& ct, std::uint32_t width,
                                      std::span<const double> weights = {});

/// A table defined by a value function of 0-based states.
struct TableDescription {
  RadixVector radices;
  std::function<double(std::span<const std::uint32_t>)> value;
};

/// Table whose position k lists the states in order perm: output node i
/// is input node perm[i]. Generated by streaming; never dense.
CompressedTable reorder_generate(const TableDescription& spec, std::span<const std::size_t> perm);

/// Same permutation applied to an existing compressed table over `radices`.
CompressedTable reorder(const CompressedTable& ct, const RadixVector& radices,
                        std::span<const std::size_t> perm);

}  // namespace relcomp
