#include <benchmark/benchmark.h>

#include "vra/selection.hpp"
#include "vra/svr.hpp"
#include "vra/synth.hpp"

using namespace vra;

namespace {

// Training-pool shaped problem: 512 rows as in one protocol iteration.
void BM_TrainSvr(benchmark::State& state, Kernel kernel, double C) {
  const auto p = make_regression_problem(static_cast<std::size_t>(state.range(0)),
                                         static_cast<std::size_t>(state.range(1)), 5, 0.5, 1);
  const SvrParams params{kernel, C, 0.1};
  std::int64_t iterations = 0;
  for (auto _ : state) {
    const SvrModel m = train_svr(p.X, p.y, params);
    iterations = m.iterations;
    benchmark::DoNotOptimize(m.bias);
  }
  state.counters["smo_iterations"] = static_cast<double>(iterations);
}

void BM_GridSearch(benchmark::State& state) {
  const auto p = make_regression_problem(512, 72, 5, 0.5, 2);
  for (auto _ : state) benchmark::DoNotOptimize(grid_search(p.X, p.y, SvrParams{}, SvrGrid{}, 0).best_C);
}

void BM_Predict(benchmark::State& state) {
  const auto p = make_regression_problem(512, 72, 5, 0.5, 3);
  const SvrModel m = train_svr(p.X, p.y, {Kernel::rbf(0.01), 10.0, 0.1});
  for (auto _ : state) benchmark::DoNotOptimize(predict(m, p.X).sum());
  state.SetItemsProcessed(state.iterations() * p.X.rows());
}

void BM_RankByImportance(benchmark::State& state) {
  const auto p = make_regression_problem(512, static_cast<std::size_t>(state.range(0)), 5, 0.5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rank_by_importance(p.X, p.y, SelectionConfig{}.svr).front());
}

}  // namespace

BENCHMARK_CAPTURE(BM_TrainSvr, linear_c0_1, Kernel::linear(), 0.1)->Args({128, 72})->Args({512, 72})->Args({512, 100})
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainSvr, rbf_c10, Kernel::rbf(0.01), 10.0)->Args({128, 72})->Args({512, 72})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Predict)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RankByImportance)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
