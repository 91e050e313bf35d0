#include <benchmark/benchmark.h>

#include "leakscope/cfg.hpp"
#include "leakscope/decompose.hpp"
#include "leakscope/engine.hpp"
#include "leakscope/parser.hpp"
#include "leakscope/preprocess.hpp"
#include "leakscope/ranges.hpp"

using namespace leakscope;

namespace {

std::string fixture(const std::string& name) {
  return std::string(LEAKSCOPE_FIXTURES) + "/" + name;
}

}  // namespace

static void BM_EnumerateReservoir(benchmark::State& state) {
  const PreparedProgram prep =
      preprocess(parse_file(fixture("reservoir_n6.hyleak")));
  const Cfg cfg = build_cfg(prep);
  for (auto _ : state)
    benchmark::DoNotOptimize(enumerate_traces(cfg, EngineLimits{}));
}
BENCHMARK(BM_EnumerateReservoir)->Unit(benchmark::kMillisecond);

static void BM_SampleWalkComponent(benchmark::State& state) {
  const PreparedProgram prep =
      preprocess(parse_file(fixture("random_walk.hyleak")));
  const Cfg cfg0 = build_cfg(prep);
  const Decomposition d = decompose(prep, cfg0, estimate_ranges(cfg0));
  const Cfg cfg = build_cfg(d.program);
  const SecretSpace secrets = SecretSpace::from(cfg);
  const EnumerationResult enumd = enumerate_traces(cfg, EngineLimits{});
  const SavedComponent& c = enumd.components.front();
  std::uint64_t batch = 0;
  for (auto _ : state) {
    Rng rng = Rng::derive(1, 0, batch++);
    benchmark::DoNotOptimize(
        sample_component_abs(cfg, secrets, c, state.range(0), rng,
                             EngineLimits{}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleWalkComponent)->Arg(1000)->Arg(10000)
    ->Unit(benchmark::kMillisecond);

static void BM_ParsePreprocess(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(
        preprocess(parse_file(fixture("lying_crypto.hyleak"))));
}
BENCHMARK(BM_ParsePreprocess)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
