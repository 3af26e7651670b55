#pragma once

#include <cstdint>
#include <algorithm>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace relcomp {

/// One compressed segment: a run (v1 repeated `length` times) or a phrase
/// (v1 once, then v2 repeated length - 1 times), repeated `count` times.
struct Segment {
  bool phrase = false;
  double v1 = 0.0;
  double v2 = 0.0;
  std::uint64_t length = 1;
  std::uint64_t count = 1;

  std::uint64_t expanded() const noexcept { return length * count; }
  bool same_entry(const Segment& o) const noexcept;
};

struct RunEntry {
  double value;
  std::uint64_t length;
};

struct PhraseEntry {
  double first;
  double second;
  std::uint64_t length;
};

/// A row of the table: reference to a dictionary entry with a repeat count.
/// `id` is a 0-based index into the run or phrase dictionary.
struct TableRow {
  bool phrase;
  std::uint32_t id;
  std::uint64_t count;
};

/// Receives a stream of segments.
class SegmentSink {
 public:
  virtual ~SegmentSink() = default;
  virtual void consume(const Segment& s) = 0;
  virtual void finish() = 0;
};

/// Receives a stream of values, each with a multiplicity.
class ValueSink {
 public:
  virtual ~ValueSink() = default;
  virtual void consume(double value, std::uint64_t mult) = 0;
  virtual void finish() = 0;
};

class CompressedTable {
 public:
  const std::vector<RunEntry>& runs() const noexcept { return runs_; }
  const std::vector<PhraseEntry>& phrases() const noexcept { return phrases_; }
  const std::vector<TableRow>& rows() const noexcept { return rows_; }
  /// S^all: 1-based first expanded position of each row.
  const std::vector<std::uint64_t>& start_offsets() const noexcept { return starts_; }
  /// RP: start offsets of the rows referencing each run / phrase entry.
  const std::vector<std::vector<std::uint64_t>>& run_refs() const noexcept { return run_refs_; }
  const std::vector<std::vector<std::uint64_t>>& phrase_refs() const noexcept { return phrase_refs_; }
  std::uint64_t total_len() const noexcept { return total_len_; }

  Segment segment(std::size_t row) const;
  std::uint64_t row_length(std::size_t row) const;

  /// Bytes held by dictionaries, rows, S^all and RP.
  std::uint64_t memory_bytes() const noexcept;

  /// Throws IntegrityError on any violated structural invariant.
  void validate() const;

  /// Streams every row as a segment.
  void replay(SegmentSink& sink) const;

  /// Rebuilds a table from raw parts; validates.
  static CompressedTable from_parts(std::vector<RunEntry> runs, std::vector<PhraseEntry> phrases,
                                    std::vector<TableRow> rows);

 private:
  friend class TableBuilder;
  void rebuild_index();

  std::vector<RunEntry> runs_;
  std::vector<PhraseEntry> phrases_;
  std::vector<TableRow> rows_;
  std::vector<std::uint64_t> starts_;
  std::vector<std::vector<std::uint64_t>> run_refs_;
  std::vector<std::vector<std::uint64_t>> phrase_refs_;
  std::uint64_t total_len_ = 0;
};

/// Greedy run/phrase scanner. Each maximal run of equal values of length
/// >= 2 becomes a run; a lone value followed by such a run becomes a
/// phrase; other lone values become length-1 runs. Adjacent identical
/// segments are folded into one with a larger count. -0.0 is stored as 0.0.
class StreamCompressor final : public ValueSink {
 public:
  explicit StreamCompressor(SegmentSink& out) : out_(out) {}

  void consume(double value, std::uint64_t mult) override {
    value += 0.0;
    if (run_len_ != 0 && value == run_value_) {
      run_len_ += mult;
      return;
    }
    flush_run();
    run_value_ = value;
    run_len_ = mult;
  }
  void consume(std::span<const double> values) {
    for (double v : values) consume(v, 1);
  }
  void finish() override;

  std::uint64_t consumed() const noexcept { return consumed_ + run_len_; }
  std::uint64_t segments_emitted() const noexcept { return emitted_; }

 private:
  void flush_run();
  void process_run(double value, std::uint64_t len);
  void emit(const Segment& s);

  SegmentSink& out_;
  double run_value_ = 0.0;
  std::uint64_t run_len_ = 0;
  bool has_single_ = false;
  double single_ = 0.0;
  bool has_pending_ = false;
  Segment pending_;
  std::uint64_t consumed_ = 0;
  std::uint64_t emitted_ = 0;
};

/// Materializes a segment stream as a CompressedTable with deduplicated
/// dictionaries.
class TableBuilder final : public SegmentSink {
 public:
  TableBuilder();
  ~TableBuilder() override;
  void consume(const Segment& s) override;
  void finish() override;
  /// The finished table; call after finish().
  CompressedTable take();

 private:
  struct Index;
  CompressedTable table_;
  std::unique_ptr<Index> index_;
  bool finished_ = false;
};

/// Replays a segment into a value sink (runs as one call, phrases per repeat).
void expand_into(const Segment& s, ValueSink& sink);

/// Compresses a materialized sequence. Throws IntegrityError when the
/// sequence length differs from `total_len`.
CompressedTable compress(std::span<const double> values, std::uint64_t total_len);
inline CompressedTable compress(std::span<const double> values) {
  return compress(values, values.size());
}

/// Compresses values produced by `generate(first, out)` in chunks of at
/// most `chunk` entries.
template <typename Generator>
CompressedTable compress_stream(std::uint64_t total_len, Generator&& generate,
                                std::size_t chunk = 65536);

std::vector<double> decompress(const CompressedTable& ct);

/// 1-based random access by binary search on S^all.
double value_at(const CompressedTable& ct, std::uint64_t k);

/// Little-endian binary layout: "RCPT", u32 version, u64 total_len,
/// u64 run/phrase/row counts, run entries (f64 value, u64 length), phrase
/// entries (f64, f64, u64), rows (u8 kind, u32 id, u64 count), S^all (u64).
void dump(const CompressedTable& ct, std::ostream& out);
CompressedTable load(std::istream& in);

template <typename Generator>
CompressedTable compress_stream(std::uint64_t total_len, Generator&& generate, std::size_t chunk) {
  TableBuilder builder;
  StreamCompressor compressor(builder);
  std::vector<double> buf(chunk);
  for (std::uint64_t first = 0; first < total_len;) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(chunk, total_len - first));
    std::span<double> out(buf.data(), n);
    generate(first, out);
    compressor.consume(std::span<const double>(out));
    first += n;
  }
  compressor.finish();
  return builder.take();
}

}  // namespace relcomp
