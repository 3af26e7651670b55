#include "relcomp/cnpt.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>

#include "relcomp/error.hpp"

namespace relcomp {
namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v + 0.0); }

struct KeyHash {
  std::size_t operator()(const std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>& k) const {
    std::uint64_t h = std::get<0>(k) * 0x9E3779B97F4A7C15ULL;
    h ^= std::get<1>(k) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= std::get<2>(k) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

bool Segment::same_entry(const Segment& o) const noexcept {
  return phrase == o.phrase && length == o.length && bits(v1) == bits(o.v1) &&
         (!phrase || bits(v2) == bits(o.v2));
}

Segment CompressedTable::segment(std::size_t row) const {
  const TableRow& r = rows_.at(row);
  Segment s;
  s.phrase = r.phrase;
  s.count = r.count;
  if (r.phrase) {
    const PhraseEntry& e = phrases_.at(r.id);
    s.v1 = e.first;
    s.v2 = e.second;
    s.length = e.length;
  } else {
    const RunEntry& e = runs_.at(r.id);
    s.v1 = e.value;
    s.length = e.length;
  }
  return s;
}

std::uint64_t CompressedTable::row_length(std::size_t row) const { return segment(row).expanded(); }

std::uint64_t CompressedTable::memory_bytes() const noexcept {
  std::uint64_t bytes = runs_.size() * sizeof(RunEntry) + phrases_.size() * sizeof(PhraseEntry) +
                        rows_.size() * sizeof(TableRow) + starts_.size() * sizeof(std::uint64_t);
  for (const auto& g : run_refs_) bytes += g.size() * sizeof(std::uint64_t) + sizeof(g);
  for (const auto& g : phrase_refs_) bytes += g.size() * sizeof(std::uint64_t) + sizeof(g);
  return bytes;
}

void CompressedTable::rebuild_index() {
  starts_.clear();
  starts_.reserve(rows_.size());
  run_refs_.assign(runs_.size(), {});
  phrase_refs_.assign(phrases_.size(), {});
  std::uint64_t pos = 1;
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    const TableRow& r = rows_[j];
    if (r.phrase ? r.id >= phrases_.size() : r.id >= runs_.size()) {
      throw IntegrityError("row " + std::to_string(j + 1) + " references a missing entry");
    }
    starts_.push_back(pos);
    (r.phrase ? phrase_refs_ : run_refs_)[r.id].push_back(pos);
    pos += row_length(j);
  }
  total_len_ = pos - 1;
}

void CompressedTable::validate() const {
  std::uint64_t pos = 1;
  if (starts_.size() != rows_.size()) throw IntegrityError("S^all size differs from row count");
  std::vector<std::size_t> run_seen(runs_.size(), 0), phrase_seen(phrases_.size(), 0);
  for (const auto& e : runs_) {
    if (e.length < 1 || !(e.value >= 0.0) || !std::isfinite(e.value)) {
      throw IntegrityError("invalid run entry");
    }
  }
  for (const auto& e : phrases_) {
    if (e.length < 2 || !(e.first >= 0.0) || !(e.second >= 0.0) || !std::isfinite(e.first) ||
        !std::isfinite(e.second)) {
      throw IntegrityError("invalid phrase entry");
    }
  }
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    const TableRow& r = rows_[j];
    if (r.count < 1) throw IntegrityError("row with zero count");
    if (r.phrase ? r.id >= phrases_.size() : r.id >= runs_.size()) {
      throw IntegrityError("row " + std::to_string(j + 1) + " references a missing entry");
    }
    if (starts_[j] != pos) throw IntegrityError("S^all inconsistent at row " + std::to_string(j + 1));
    const auto& group = r.phrase ? phrase_refs_.at(r.id) : run_refs_.at(r.id);
    auto& seen = r.phrase ? phrase_seen[r.id] : run_seen[r.id];
    if (seen >= group.size() || group[seen] != pos) {
      throw IntegrityError("RP inconsistent at row " + std::to_string(j + 1));
    }
    ++seen;
    pos += row_length(j);
  }
  for (std::size_t i = 0; i < runs_.size(); ++i) {
    if (run_seen[i] != run_refs_.at(i).size()) throw IntegrityError("RP has stale run offsets");
  }
  for (std::size_t i = 0; i < phrases_.size(); ++i) {
    if (phrase_seen[i] != phrase_refs_.at(i).size()) {
      throw IntegrityError("RP has stale phrase offsets");
    }
  }
  if (pos - 1 != total_len_) throw IntegrityError("row lengths do not add up to total_len");
}

void CompressedTable::replay(SegmentSink& sink) const {
  for (std::size_t j = 0; j < rows_.size(); ++j) sink.consume(segment(j));
  sink.finish();
}

CompressedTable CompressedTable::from_parts(std::vector<RunEntry> runs,
                                            std::vector<PhraseEntry> phrases,
                                            std::vector<TableRow> rows) {
  CompressedTable t;
  t.runs_ = std::move(runs);
  t.phrases_ = std::move(phrases);
  t.rows_ = std::move(rows);
  t.rebuild_index();
  t.validate();
  return t;
}

void StreamCompressor::emit(const Segment& s) {
  if (has_pending_ && pending_.same_entry(s)) {
    pending_.count += s.count;
    return;
  }
  if (has_pending_) {
    out_.consume(pending_);
    ++emitted_;
  }
  pending_ = s;
  has_pending_ = true;
}

void StreamCompressor::process_run(double value, std::uint64_t len) {
  consumed_ += len;
  if (has_single_) {
    has_single_ = false;
    if (len >= 2) {
      emit(Segment{true, single_, value, len + 1, 1});
      return;
    }
    emit(Segment{false, single_, 0.0, 1, 1});
  }
  if (len >= 2) {
    emit(Segment{false, value, 0.0, len, 1});
  } else {
    has_single_ = true;
    single_ = value;
  }
}

void StreamCompressor::flush_run() {
  if (run_len_ == 0) return;
  const std::uint64_t len = run_len_;
  run_len_ = 0;
  process_run(run_value_, len);
}

void StreamCompressor::finish() {
  flush_run();
  if (has_single_) {
    has_single_ = false;
    emit(Segment{false, single_, 0.0, 1, 1});
  }
  if (has_pending_) {
    out_.consume(pending_);
    ++emitted_;
    has_pending_ = false;
  }
  out_.finish();
}

struct TableBuilder::Index {
  std::unordered_map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>, std::uint32_t, KeyHash>
      runs, phrases;
};

TableBuilder::TableBuilder() : index_(std::make_unique<Index>()) {}
TableBuilder::~TableBuilder() = default;

void TableBuilder::consume(const Segment& s) {
  if (finished_) throw IntegrityError("TableBuilder used after finish");
  CompressedTable& t = table_;
  std::uint32_t id;
  if (s.phrase) {
    auto key = std::make_tuple(bits(s.v1), bits(s.v2), s.length);
    auto [it, inserted] = index_->phrases.try_emplace(key, static_cast<std::uint32_t>(t.phrases_.size()));
    if (inserted) {
      if (t.phrases_.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw IntegrityError("phrase dictionary overflow");
      }
      t.phrases_.push_back(PhraseEntry{s.v1 + 0.0, s.v2 + 0.0, s.length});
      t.phrase_refs_.emplace_back();
    }
    id = it->second;
  } else {
    auto key = std::make_tuple(bits(s.v1), std::uint64_t{0}, s.length);
    auto [it, inserted] = index_->runs.try_emplace(key, static_cast<std::uint32_t>(t.runs_.size()));
    if (inserted) {
      if (t.runs_.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw IntegrityError("run dictionary overflow");
      }
      t.runs_.push_back(RunEntry{s.v1 + 0.0, s.length});
      t.run_refs_.emplace_back();
    }
    id = it->second;
  }
  const std::uint64_t start = t.total_len_ + 1;
  t.rows_.push_back(TableRow{s.phrase, id, s.count});
  t.starts_.push_back(start);
  (s.phrase ? t.phrase_refs_ : t.run_refs_)[id].push_back(start);
  t.total_len_ += s.expanded();
}

void TableBuilder::finish() { finished_ = true; }

CompressedTable TableBuilder::take() {
  if (!finished_) throw IntegrityError("TableBuilder::take before finish");
  index_->runs.clear();
  index_->phrases.clear();
  return std::move(table_);
}

void expand_into(const Segment& s, ValueSink& sink) {
  if (!s.phrase) {
    sink.consume(s.v1, s.length * s.count);
    return;
  }
  for (std::uint64_t c = 0; c < s.count; ++c) {
    sink.consume(s.v1, 1);
    sink.consume(s.v2, s.length - 1);
  }
}

CompressedTable compress(std::span<const double> values, std::uint64_t total_len) {
  if (values.size() != total_len) {
    throw IntegrityError("compress: stream has " + std::to_string(values.size()) +
                         " values, expected " + std::to_string(total_len));
  }
  TableBuilder builder;
  StreamCompressor compressor(builder);
  compressor.consume(values);
  compressor.finish();
  return builder.take();
}

std::vector<double> decompress(const CompressedTable& ct) {
  std::vector<double> out;
  out.reserve(ct.total_len());
  for (std::size_t j = 0; j < ct.rows().size(); ++j) {
    const Segment s = ct.segment(j);
    for (std::uint64_t c = 0; c < s.count; ++c) {
      out.push_back(s.v1);
      out.insert(out.end(), s.length - 1, s.phrase ? s.v2 : s.v1);
    }
  }
  if (out.size() != ct.total_len()) throw IntegrityError("decompressed length mismatch");
  return out;
}

double value_at(const CompressedTable& ct, std::uint64_t k) {
  if (k < 1 || k > ct.total_len()) {
    throw DomainError("value_at: index " + std::to_string(k) + " outside 1.." +
                      std::to_string(ct.total_len()));
  }
  const auto& starts = ct.start_offsets();
  const auto it = std::upper_bound(starts.begin(), starts.end(), k);
  const std::size_t row = static_cast<std::size_t>(it - starts.begin()) - 1;
  const Segment s = ct.segment(row);
  if (!s.phrase) return s.v1;
  const std::uint64_t within = (k - starts[row]) % s.length;
  return within == 0 ? s.v1 : s.v2;
}

namespace {

constexpr char kMagic[4] = {'R', 'C', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  std::uint64_t u;
  if constexpr (std::is_same_v<T, double>) {
    u = std::bit_cast<std::uint64_t>(v);
  } else {
    u = static_cast<std::uint64_t>(v);
  }
  char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw IntegrityError("truncated compressed table");
  }
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= std::uint64_t{buf[i]} << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(u);
  } else {
    return static_cast<T>(u);
  }
}

}  // namespace

void dump(const CompressedTable& ct, std::ostream& out) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, ct.total_len());
  put<std::uint64_t>(out, ct.runs().size());
  put<std::uint64_t>(out, ct.phrases().size());
  put<std::uint64_t>(out, ct.rows().size());
  for (const auto& e : ct.runs()) {
    put<double>(out, e.value);
    put<std::uint64_t>(out, e.length);
  }
  for (const auto& e : ct.phrases()) {
    put<double>(out, e.first);
    put<double>(out, e.second);
    put<std::uint64_t>(out, e.length);
  }
  for (const auto& r : ct.rows()) {
    put<std::uint8_t>(out, r.phrase ? 1 : 0);
    put<std::uint32_t>(out, r.id);
    put<std::uint64_t>(out, r.count);
  }
  for (std::uint64_t s : ct.start_offsets()) put<std::uint64_t>(out, s);
  if (!out) throw IoError("failed writing compressed table");
}

CompressedTable load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw IntegrityError("not a compressed table (bad magic)");
  }
  if (get<std::uint32_t>(in) != kVersion) throw IntegrityError("unsupported table version");
  const auto total = get<std::uint64_t>(in);
  const auto n_runs = get<std::uint64_t>(in);
  const auto n_phrases = get<std::uint64_t>(in);
  const auto n_rows = get<std::uint64_t>(in);
  std::vector<RunEntry> runs;
  std::vector<PhraseEntry> phrases;
  std::vector<TableRow> rows;
  for (std::uint64_t i = 0; i < n_runs; ++i) {
    const double v = get<double>(in);
    runs.push_back(RunEntry{v, get<std::uint64_t>(in)});
  }
  for (std::uint64_t i = 0; i < n_phrases; ++i) {
    const double a = get<double>(in);
    const double b = get<double>(in);
    phrases.push_back(PhraseEntry{a, b, get<std::uint64_t>(in)});
  }
  for (std::uint64_t i = 0; i < n_rows; ++i) {
    const bool phrase = get<std::uint8_t>(in) != 0;
    const auto id = get<std::uint32_t>(in);
    rows.push_back(TableRow{phrase, id, get<std::uint64_t>(in)});
  }
  std::vector<std::uint64_t> starts;
  for (std::uint64_t i = 0; i < n_rows; ++i) starts.push_back(get<std::uint64_t>(in));
  CompressedTable t = CompressedTable::from_parts(std::move(runs), std::move(phrases), std::move(rows));
  if (t.total_len() != total || t.start_offsets() != starts) {
    throw IntegrityError("stored offsets disagree with rows");
  }
  return t;
}

}  // namespace relcomp
