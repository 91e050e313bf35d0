#include <benchmark/benchmark.h>

#include "leakscope/estimator.hpp"
#include "leakscope/matrix_io.hpp"
#include "leakscope/measures.hpp"
#include "leakscope/rng.hpp"

using namespace leakscope;

namespace {

CellCounts multinomial(const JointDistribution& j, Count n, Rng& rng) {
  std::vector<std::pair<Value, Value>> cells;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [ix, iy] : j.support()) {
    acc += j.pxy(ix, iy);
    cells.emplace_back(j.domain().secrets()[ix], j.domain().observables()[iy]);
    cumulative.push_back(acc);
  }
  cumulative.back() = 1.0;
  CellCounts counts;
  for (Count k = 0; k < n; ++k) {
    const double u = rng.u01();
    counts[cells[static_cast<std::size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) -
        cumulative.begin())]] += 1;
  }
  return counts;
}

const JointDistribution& matrix10() {
  static const JointDistribution j =
      read_matrix_csv_file(std::string(LEAKSCOPE_FIXTURES) + "/channel10.csv");
  return j;
}

}  // namespace

static void BM_MutualInformation10x10(benchmark::State& state) {
  const JointDistribution& j = matrix10();
  for (auto _ : state) benchmark::DoNotOptimize(mutual_information(j));
}
BENCHMARK(BM_MutualInformation10x10);

static void BM_EstimateMI(benchmark::State& state) {
  Rng rng(42);
  const Count n = state.range(0);
  const ComponentResult c =
      ComponentResult::sampled(1.0, multinomial(matrix10(), n, rng), n);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_mi({c}, 0.05));
}
BENCHMARK(BM_EstimateMI)->Arg(1000)->Arg(10000)->Arg(100000);

static void BM_MultinomialDraw(benchmark::State& state) {
  Rng rng(42);
  for (auto _ : state)
    benchmark::DoNotOptimize(multinomial(matrix10(), state.range(0), rng));
}
BENCHMARK(BM_MultinomialDraw)->Arg(10000);
