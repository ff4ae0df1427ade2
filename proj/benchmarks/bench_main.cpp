#include <benchmark/benchmark.h>

#include "fptx/harness.hpp"
#include "fptx/sampling.hpp"

using namespace fptx;

static void BM_RoundDecimal(benchmark::State& st) {
  CounterRng rng(1, 0);
  std::vector<double> xs(4096);
  for (auto& x : xs) x = rng.normal() * 1e3;
  const int s = static_cast<int>(st.range(0));
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(round_decimal(xs[i++ & 4095], s));
}
BENCHMARK(BM_RoundDecimal)->Arg(4)->Arg(8);

static void BM_RoundBinary(benchmark::State& st) {
  CounterRng rng(1, 0);
  std::vector<double> xs(4096);
  for (auto& x : xs) x = rng.normal() * 1e3;
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(round_binary(xs[i++ & 4095], 24));
}
BENCHMARK(BM_RoundBinary);

static void BM_Block(benchmark::State& st) {
  CounterRng rng(2, 0);
  const auto cfg = random_config(rng, 20, 20, 1, NormVariant::Layer, 0.5);
  const Mat X = random_matrix(rng, 20, 20);
  const Arith ar(st.range(0) ? PrecisionSpec::decimal(6) : PrecisionSpec::native());
  for (auto _ : st) benchmark::DoNotOptimize(transformer_block(cfg, 0, X, ar));
}
BENCHMARK(BM_Block)->Arg(0)->Arg(1);

static void BM_JacobiSvd(benchmark::State& st) {
  CounterRng rng(3, 0);
  const auto n = static_cast<std::size_t>(st.range(0));
  const Mat m = random_matrix(rng, n, n);
  for (auto _ : st) benchmark::DoNotOptimize(sv_extremes(m));
}
BENCHMARK(BM_JacobiSvd)->Arg(20)->Arg(100);
BENCHMARK_MAIN();
