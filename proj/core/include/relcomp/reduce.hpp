#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "relcomp/cnpt.hpp"
#include "relcomp/eliminate.hpp"

namespace relcomp {

/// Generates the dense values of a table on demand, by 0-based position.
class TableSource {
 public:
  virtual ~TableSource() = default;
  virtual std::uint64_t size() const = 0;
  virtual void fill(std::uint64_t first, std::span<double> out) = 0;
  /// Independent copy for use on another thread.
  virtual std::unique_ptr<TableSource> clone() const = 0;
};

/// Source over an existing vector (tests, small tables).
class VectorSource final : public TableSource {
 public:
  explicit VectorSource(std::vector<double> values) : values_(std::make_shared<std::vector<double>>(std::move(values))) {}
  std::uint64_t size() const override { return values_->size(); }
  void fill(std::uint64_t first, std::span<double> out) override {
    std::copy_n(values_->begin() + static_cast<std::ptrdiff_t>(first), out.size(), out.begin());
  }
  std::unique_ptr<TableSource> clone() const override { return std::make_unique<VectorSource>(*this); }

 private:
  std::shared_ptr<const std::vector<double>> values_;
};

/// One trailing node to sum out; weights empty means unweighted.
struct EliminationStep {
  std::uint32_t width;
  std::vector<double> weights;
};

enum class ReduceMode {
  kAuto,    ///< staged up to kStagedLimit source entries, fused above
  kStaged,  ///< materialize every intermediate table
  kFused,   ///< chain all eliminations on the stream; no intermediate tables
};

std::string_view to_string(ReduceMode mode) noexcept;

struct ReduceOptions {
  ReduceMode mode = ReduceMode::kAuto;
  std::size_t chunk = 65536;  ///< dense entries generated per fill call, at most 1e6
  unsigned threads = 1;
};

inline constexpr std::uint64_t kStagedLimit = 10'000'000;
inline constexpr std::size_t kMaxChunk = 1'000'000;

struct ReduceStats {
  ReduceMode mode_used = ReduceMode::kStaged;
  std::uint64_t dense_entries = 0;      ///< size of the source table
  std::uint64_t stage0_rows = 0;        ///< rows of the compressed source table
  std::uint64_t stage0_dict_entries = 0;
  bool stage0_dict_exact = true;        ///< false when the entry count was capped
  std::uint64_t stage0_bytes = 0;       ///< bytes the compressed source table occupies
  std::uint64_t peak_table_bytes = 0;   ///< largest resident compressed table data
  std::size_t max_chunk = 0;            ///< largest dense chunk generated
  std::uint64_t output_entries = 0;
  EliminationCases cases;
  double elapsed_seconds = 0.0;
};

/// Sums out trailing nodes of the source table, steps[0] being the
/// fastest-varying node. Returns the compressed table over the rest.
CompressedTable reduce_trailing(const TableSource& source, std::span<const EliminationStep> steps,
                                const ReduceOptions& options = {}, ReduceStats* stats = nullptr);

}  // namespace relcomp
