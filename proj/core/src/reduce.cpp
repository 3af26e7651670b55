#include "relcomp/reduce.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <thread>
#include <unordered_set>

#include "relcomp/error.hpp"

namespace relcomp {
namespace {

constexpr std::size_t kDictTrackCap = 1 << 20;

void add_cases(EliminationCases& into, const EliminationCases& from) {
  for (std::size_t h = 0; h < 3; ++h) {
    for (std::size_t f = 0; f < 4; ++f) {
      into.run[h][f] += from.run[h][f];
      into.phrase[h][f] += from.phrase[h][f];
    }
  }
}

// Counts what the stage-0 table would hold while forwarding segments.
class Stage0Meter final : public SegmentSink {
 public:
  explicit Stage0Meter(SegmentSink& next) : next_(next) {}
  void consume(const Segment& s) override {
    ++rows_;
    if (keys_.size() < kDictTrackCap) {
      keys_.insert(Key{s.phrase, std::bit_cast<std::uint64_t>(s.v1), std::bit_cast<std::uint64_t>(s.phrase ? s.v2 : 0.0), s.length});
    } else {
      capped_ = true;
    }
    next_.consume(s);
  }
  void finish() override { next_.finish(); }

  std::uint64_t rows() const { return rows_; }
  std::uint64_t runs() const { return std::count_if(keys_.begin(), keys_.end(), [](const Key& k) { return !k.phrase; }); }
  std::uint64_t entries() const { return keys_.size(); }
  bool capped() const { return capped_; }

 private:
  struct Key {
    bool phrase;
    std::uint64_t a, b, len;
    bool operator==(const Key&) const = default;
  };
  struct Hash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.a * 0x9E3779B97F4A7C15ULL ^ (k.b + 0x7F4A7C15ULL + (k.len << 17)) ^ k.phrase;
      return static_cast<std::size_t>(h ^ (h >> 31));
    }
  };
  SegmentSink& next_;
  std::unordered_set<Key, Hash> keys_;
  std::uint64_t rows_ = 0;
  bool capped_ = false;
};

class SegmentCollector final : public SegmentSink {
 public:
  void consume(const Segment& s) override { segments.push_back(s); }
  void finish() override {}
  std::vector<Segment> segments;
};

// Elimination stages chained on one stream, ending in `sink`.
struct Pipeline {
  std::vector<std::unique_ptr<StreamCompressor>> compressors;
  std::vector<std::unique_ptr<EliminationStage>> stages;
  std::unique_ptr<Stage0Meter> meter;

  Pipeline(std::span<const EliminationStep> steps, SegmentSink& sink) {
    const std::size_t k = steps.size();
    compressors.resize(k + 1);
    stages.resize(k);
    compressors[k] = std::make_unique<StreamCompressor>(sink);
    for (std::size_t i = k; i-- > 0;) {
      stages[i] = std::make_unique<EliminationStage>(steps[i].width, steps[i].weights, *compressors[i + 1]);
      if (i == 0) {
        meter = std::make_unique<Stage0Meter>(*stages[0]);
        compressors[0] = std::make_unique<StreamCompressor>(*meter);
      } else {
        compressors[i] = std::make_unique<StreamCompressor>(*stages[i]);
      }
    }
    if (k == 0) {
      compressors[0].reset();
      meter = std::make_unique<Stage0Meter>(sink);
      compressors[0] = std::make_unique<StreamCompressor>(*meter);
    }
  }
  StreamCompressor& head() { return *compressors[0]; }
};

void run_range(TableSource& source, std::uint64_t first, std::uint64_t last, std::size_t chunk,
               StreamCompressor& head) {
  std::vector<double> buf(std::min<std::uint64_t>(chunk, last - first));
  for (std::uint64_t pos = first; pos < last;) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(buf.size(), last - pos));
    std::span<double> out(buf.data(), n);
    source.fill(pos, out);
    head.consume(std::span<const double>(out));
    pos += n;
  }
  head.finish();
}

std::uint64_t estimate_bytes(std::uint64_t rows, std::uint64_t entries) {
  // row + S^all offset + RP offset per row, one entry slot per dictionary entry
  return rows * (sizeof(TableRow) + 2 * sizeof(std::uint64_t)) + entries * sizeof(PhraseEntry);
}

}  // namespace

std::string_view to_string(ReduceMode mode) noexcept {
  switch (mode) {
    case ReduceMode::kAuto: return "auto";
    case ReduceMode::kStaged: return "staged";
    case ReduceMode::kFused: return "fused";
  }
  return "?";
}

CompressedTable reduce_trailing(const TableSource& source, std::span<const EliminationStep> steps,
                                const ReduceOptions& options, ReduceStats* stats) {
  const auto t_start = std::chrono::steady_clock::now();
  ReduceStats local;
  ReduceStats& st = stats ? *stats : local;
  st = ReduceStats{};
  const std::uint64_t total = source.size();
  st.dense_entries = total;
  if (options.chunk == 0 || options.chunk > kMaxChunk) {
    throw DomainError("chunk size must be in 1.." + std::to_string(kMaxChunk));
  }
  std::uint64_t group = 1;
  for (const auto& s : steps) {
    if (s.width < 1) throw DomainError("elimination width must be >= 1");
    if (!s.weights.empty() && s.weights.size() != s.width) {
      throw DomainError("weight vector length mismatch");
    }
    group *= s.width;
  }
  if (total % group != 0) {
    throw ModelError("table of " + std::to_string(total) + " entries does not split into groups of " +
                     std::to_string(group));
  }
  ReduceMode mode = options.mode;
  if (mode == ReduceMode::kAuto) mode = total <= kStagedLimit ? ReduceMode::kStaged : ReduceMode::kFused;
  st.mode_used = mode;
  st.max_chunk = static_cast<std::size_t>(std::min<std::uint64_t>(options.chunk, total));

  CompressedTable result;
  if (mode == ReduceMode::kStaged) {
    std::unique_ptr<TableSource> src = source.clone();
    CompressedTable table = compress_stream(
        total, [&](std::uint64_t first, std::span<double> out) { src->fill(first, out); }, options.chunk);
    st.stage0_rows = table.rows().size();
    st.stage0_dict_entries = table.runs().size() + table.phrases().size();
    st.stage0_bytes = table.memory_bytes();
    st.peak_table_bytes = st.stage0_bytes;
    for (const auto& s : steps) {
      EliminateResult r = eliminate_last_traced(table, s.width, s.weights);
      add_cases(st.cases, r.cases);
      st.peak_table_bytes = std::max(st.peak_table_bytes, table.memory_bytes() + r.table.memory_bytes());
      table = std::move(r.table);
    }
    result = std::move(table);
  } else {
    const std::uint64_t out_len = total / group;
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(std::min<std::uint64_t>(out_len, 1024))));
    std::vector<SegmentCollector> collected(threads);
    std::vector<std::unique_ptr<Pipeline>> pipelines(threads);
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned t) {
      try {
        const std::uint64_t g0 = out_len * t / threads;
        const std::uint64_t g1 = out_len * (t + 1) / threads;
        std::unique_ptr<TableSource> src = source.clone();
        pipelines[t] = std::make_unique<Pipeline>(steps, collected[t]);
        run_range(*src, g0 * group, g1 * group, options.chunk, pipelines[t]->head());
      } catch (...) {
        errors[t] = std::current_exception();
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    TableBuilder builder;
    StreamCompressor merge(builder);
    bool capped = false;
    std::uint64_t entries = 0;
    for (unsigned t = 0; t < threads; ++t) {
      const Pipeline& p = *pipelines[t];
      st.stage0_rows += p.meter->rows();
      entries = std::max(entries, p.meter->entries());
      capped = capped || p.meter->capped() || threads > 1;
      for (const auto& stage : p.stages) add_cases(st.cases, stage->cases());
      for (const Segment& s : collected[t].segments) expand_into(s, merge);
    }
    merge.finish();
    result = builder.take();
    st.stage0_dict_entries = entries;
    st.stage0_dict_exact = !capped;
    st.stage0_bytes = estimate_bytes(st.stage0_rows, entries);
    std::uint64_t collected_bytes = 0;
    for (const auto& c : collected) collected_bytes += c.segments.size() * sizeof(Segment);
    st.peak_table_bytes = result.memory_bytes() + collected_bytes;
  }
  st.output_entries = result.total_len();
  st.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace relcomp
