#include <benchmark/benchmark.h>

#include <vector>

#include "pap/kernels.hpp"
#include "pap/rng.hpp"
#include "pap/types.hpp"

// Production kernels vs their serial reference twins, on realistic sizes.
// Run: ./kernel_bench [--benchmark_filter=...]

using namespace pap;
namespace K = pap::kernels;

namespace {

BinaryMask bench_mask(int w, int h) {
  Rng rng(99);
  BinaryMask m(w, h);
  for (auto& v : m.values) v = rng.uniform() < 0.4 ? 1 : 0;
  return m;
}

GrayImage bench_gray(int w, int h) {
  Rng rng(98);
  GrayImage g(w, h);
  for (auto& v : g.values) v = rng.uniform();
  return g;
}

void close_edt(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  BinaryMask m = bench_mask(512, 512);
  for (auto _ : state) benchmark::DoNotOptimize(K::close_disk(m, r));
}

void close_direct(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  BinaryMask m = bench_mask(512, 512);
  for (auto _ : state) benchmark::DoNotOptimize(K::reference::close_disk(m, r));
}

void open_edt(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  BinaryMask m = bench_mask(512, 512);
  for (auto _ : state) benchmark::DoNotOptimize(K::open_disk(m, r));
}

void open_direct(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  BinaryMask m = bench_mask(512, 512);
  for (auto _ : state) benchmark::DoNotOptimize(K::reference::open_disk(m, r));
}

void mean_filter(benchmark::State& state) {
  GrayImage g = bench_gray(512, 512);
  for (auto _ : state) benchmark::DoNotOptimize(K::mean_filter_disk(g, static_cast<int>(state.range(0))));
}

void conv_gemm(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  Rng rng(97);
  std::vector<double> in(static_cast<size_t>(c) * hw * hw), w(static_cast<size_t>(c) * c * 9),
      b(c), out(in.size());
  for (auto& v : in) v = rng.uniform();
  for (auto& v : w) v = rng.uniform() - 0.5;
  for (auto& v : b) v = rng.uniform() - 0.5;
  for (auto _ : state) {
    K::conv3x3(in.data(), c, hw, hw, w.data(), b.data(), c, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

void conv_naive(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  Rng rng(97);
  std::vector<double> in(static_cast<size_t>(c) * hw * hw), w(static_cast<size_t>(c) * c * 9),
      b(c), out(in.size());
  for (auto& v : in) v = rng.uniform();
  for (auto& v : w) v = rng.uniform() - 0.5;
  for (auto& v : b) v = rng.uniform() - 0.5;
  for (auto _ : state) {
    K::reference::conv3x3(in.data(), c, hw, hw, w.data(), b.data(), c, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(close_edt)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(close_direct)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(open_edt)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(open_direct)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(mean_filter)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_gemm)->Args({32, 32})->Args({64, 16})->Unit(benchmark::kMillisecond);
BENCHMARK(conv_naive)->Args({32, 32})->Args({64, 16})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
