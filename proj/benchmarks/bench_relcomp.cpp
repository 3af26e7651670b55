#include <benchmark/benchmark.h>

#include <random>

#include "relcomp/cnpt.hpp"
#include "relcomp/eliminate.hpp"
#include "relcomp/inference.hpp"
#include "relcomp/model_io.hpp"
#include "relcomp/reduce.hpp"

using namespace relcomp;

namespace {

// Deterministic-rule-like table: long zero/one runs with occasional noise.
std::vector<double> sample_table(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  double cur = 0.0;
  for (auto& x : v) {
    if (rng() % 17 == 0) cur = (rng() % 4 == 0) ? static_cast<double>(rng() % 1000) / 1000.0 : double(rng() & 1);
    x = cur;
  }
  return v;
}

SystemModel load(const char* name) { return load_model(std::string(RELCOMP_SOURCE_DIR) + "/models/" + name); }

void BM_Compress(benchmark::State& state) {
  const auto v = sample_table(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(compress(v));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Compress)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);

void BM_Decompress(benchmark::State& state) {
  const auto ct = compress(sample_table(static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(decompress(ct));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Decompress)->Arg(1 << 16)->Arg(1 << 20);

void BM_EliminateLast(benchmark::State& state) {
  const auto ct = compress(sample_table(1 << 20, 3));
  const auto width = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(eliminate_last(ct, width));
  state.SetItemsProcessed(state.iterations() * (1 << 20));
}
BENCHMARK(BM_EliminateLast)->Arg(2)->Arg(4)->Arg(16);

void BM_ReduceTrailing(benchmark::State& state) {
  const VectorSource src(sample_table(1 << 22, 4));
  const std::vector<EliminationStep> steps{{4, {0.1, 0.2, 0.3, 0.4}}, {4, {}}, {2, {0.5, 0.5}}};
  ReduceOptions opt;
  opt.mode = static_cast<ReduceMode>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reduce_trailing(src, steps, opt));
  state.SetLabel(std::string(to_string(opt.mode)));
  state.SetItemsProcessed(state.iterations() * (1 << 22));
}
BENCHMARK(BM_ReduceTrailing)->Arg(static_cast<int>(ReduceMode::kStaged))->Arg(static_cast<int>(ReduceMode::kFused));

void BM_CaseOneInfer(benchmark::State& state) {
  const SystemModel m = load("case1_pitch_axis.json");
  const QuerySpec q{parse_assignment(m, "DF=2"), {}};
  for (auto _ : state) benchmark::DoNotOptimize(infer(m, q));
}
BENCHMARK(BM_CaseOneInfer);

void BM_CaseTwoMultilevelTimePoint(benchmark::State& state) {
  const SystemModel m = load(state.range(0) ? "case2_dependent.json" : "case2_independent.json").at_time(2e4);
  for (auto _ : state) benchmark::DoNotOptimize(infer(m, {}));
  state.SetLabel(state.range(0) ? "dependent" : "independent");
}
BENCHMARK(BM_CaseTwoMultilevelTimePoint)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
