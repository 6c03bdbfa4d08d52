// Parallel pair kernels against the serial reference on synthetic data.

#include <benchmark/benchmark.h>

#include <random>

#include "mmad/meta_eval.hpp"

namespace {

std::vector<mmad::ScoredSegment> synthetic(int segments, int systems) {
  std::mt19937 rng(1234);
  std::vector<mmad::ScoredSegment> v;
  v.reserve(static_cast<std::size_t>(segments) * systems);
  for (int seg = 0; seg < segments; ++seg) {
    for (int sys = 0; sys < systems; ++sys) {
      v.push_back({"zh-en", std::to_string(seg), "sys" + std::to_string(sys), -static_cast<double>(rng() % 26),
                   -static_cast<double>(rng() % 51) / 2.0});
    }
  }
  return v;
}

void BM_accuracy_t_fast(benchmark::State& st) {
  const auto v = synthetic(static_cast<int>(st.range(0)), 8);
  for (auto _ : st) benchmark::DoNotOptimize(mmad::accuracy_t(v, 1.0));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(v.size()));
}

void BM_accuracy_t_reference(benchmark::State& st) {
  const auto v = synthetic(static_cast<int>(st.range(0)), 8);
  for (auto _ : st) benchmark::DoNotOptimize(mmad::meta_eval::reference::accuracy_t(v, 1.0));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(v.size()));
}

void BM_accuracy_t_star_fast(benchmark::State& st) {
  const auto v = synthetic(static_cast<int>(st.range(0)), 8);
  for (auto _ : st) benchmark::DoNotOptimize(mmad::accuracy_t_star(v));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(v.size()));
}

void BM_accuracy_t_star_reference(benchmark::State& st) {
  const auto v = synthetic(static_cast<int>(st.range(0)), 8);
  for (auto _ : st) benchmark::DoNotOptimize(mmad::meta_eval::reference::accuracy_t_star(v));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(v.size()));
}

}  // namespace

// The reference is quadratic in items, so it stops at smaller sizes.
BENCHMARK(BM_accuracy_t_fast)->RangeMultiplier(4)->Range(64, 16384);
BENCHMARK(BM_accuracy_t_reference)->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(BM_accuracy_t_star_fast)->RangeMultiplier(4)->Range(64, 16384);
BENCHMARK(BM_accuracy_t_star_reference)->RangeMultiplier(4)->Range(64, 256);

BENCHMARK_MAIN();
