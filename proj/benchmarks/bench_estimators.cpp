#include <filesystem>

#include <benchmark/benchmark.h>

#include "paretotab/estimators.hpp"
#include "paretotab/moments.hpp"
#include "paretotab/simulate.hpp"
#include "paretotab/tabulation.hpp"

namespace {

using namespace paretotab;

std::vector<double> geometric_fractiles(int L) {
  std::vector<double> p{0.001};
  for (int k = 0; k < L; ++k) p.push_back(p.back() * 2.0);
  return p;
}

void BM_BuildMomentSystem(benchmark::State& state) {
  const auto p = geometric_fractiles(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_moment_system(1.7, p));
}
BENCHMARK(BM_BuildMomentSystem)->DenseRange(2, 8, 3);

void BM_TwEstimateTable(benchmark::State& state) {
  const auto t = parse_tabulation(std::filesystem::path(PARETOTAB_DATA_DIR) / "2019_agi.csv");
  for (auto _ : state) benchmark::DoNotOptimize(tw_estimate(t, 192'300'000));
}
BENCHMARK(BM_TwEstimateTable)->Unit(benchmark::kMicrosecond);

void BM_MlEstimateTable(benchmark::State& state) {
  const auto t = parse_tabulation(std::filesystem::path(PARETOTAB_DATA_DIR) / "2019_agi.csv");
  for (auto _ : state) benchmark::DoNotOptimize(ml_estimate(t, 6));
}
BENCHMARK(BM_MlEstimateTable)->Unit(benchmark::kMicrosecond);

void BM_McStudySmall(benchmark::State& state) {
  SimConfig cfg;
  cfg.n_draws = state.range(0);
  cfg.replications = 4;
  for (auto _ : state) benchmark::DoNotOptimize(mc_study(cfg, Method::kTw, {}, 1));
  state.SetItemsProcessed(state.iterations() * cfg.replications * cfg.n_draws);
}
BENCHMARK(BM_McStudySmall)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
