#include <benchmark/benchmark.h>

#include "ktsbm/kt_mixture.hpp"
#include "ktsbm/likelihood.hpp"
#include "ktsbm/sbm_core.hpp"

using namespace ktsbm;

namespace {

Graph planted(int n) {
  const SbmParams p({0.5, 0.5}, SymMatrix::from_rows({{0.8, 0.2}, {0.2, 0.8}}));
  return sample_sbm(p, n, 1).graph;
}

void BM_ExactKtSerial(benchmark::State& state) {
  const auto x = planted(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(log_kt_marginal_exact_upto_serial(x, 8));
}

void BM_ExactKtParallel(benchmark::State& state) {
  const auto x = planted(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(log_kt_marginal_exact_upto(x, 8));
}

void BM_ProfileSerial(benchmark::State& state) {
  const auto x = planted(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(profile_label_search_serial(x, 3));
}

void BM_ProfileParallel(benchmark::State& state) {
  const auto x = planted(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(profile_label_search(x, 3, ExactProfile{}));
}

void BM_ProfileLocal(benchmark::State& state) {
  const auto x = planted(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(profile_label_search(x, 2, LocalProfile{20, 100, 1}));
}

void BM_McSerial(benchmark::State& state) {
  const auto x = planted(12);
  for (auto _ : state) benchmark::DoNotOptimize(log_kt_marginal_mc_serial(x, 3, state.range(0), 7));
}

void BM_McParallel(benchmark::State& state) {
  const auto x = planted(12);
  for (auto _ : state) benchmark::DoNotOptimize(log_kt_marginal_mc(x, 3, state.range(0), 7));
}

}  // namespace

BENCHMARK(BM_ExactKtSerial)->Arg(8)->Arg(10)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactKtParallel)->Arg(8)->Arg(10)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProfileSerial)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProfileParallel)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProfileLocal)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McSerial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_McParallel)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
