// Serial reference vs OpenMP batched session on the reference operating point.

#include <benchmark/benchmark.h>

#include "vortexqkd/channel.hpp"

namespace {

vortexqkd::SessionConfig bench_config(std::int64_t pulses) {
  static const vortexqkd::SessionConfig base = vortexqkd::reference_session_config();
  vortexqkd::SessionConfig c = base;
  c.pulses = static_cast<std::uint64_t>(pulses);
  return c;
}

void BM_SessionSerial(benchmark::State& state) {
  const auto config = bench_config(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(vortexqkd::run_session_serial(config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SessionParallel(benchmark::State& state) {
  const auto config = bench_config(state.range(0));
  vortexqkd::SessionOptions options;
  options.batches = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(vortexqkd::run_session(config, {}, options));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SamplePulse(benchmark::State& state) {
  const vortexqkd::SessionModel model(bench_config(1), {});
  auto rng = vortexqkd::chunk_stream(1, 0);
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vortexqkd::sample_pulse(model, rng, i++));
  }
}

}  // namespace

BENCHMARK(BM_SessionSerial)->Arg(1 << 22)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SessionParallel)
    ->Args({1 << 22, 0})
    ->Args({1 << 22, 16})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplePulse);

BENCHMARK_MAIN();
