#include <cmath>
#include <utility>

#include <benchmark/benchmark.h>

#include "vra/metrics.hpp"
#include "vra/random.hpp"

using namespace vra;

namespace {

std::pair<std::vector<double>, std::vector<double>> pairs(std::size_t n) {
  SplitMix64 r(5);
  std::vector<double> p(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = r.normal();
    g[i] = 3.0 + std::tanh(p[i]) + r.normal(0.0, 0.2);
  }
  return {p, g};
}

void BM_Srcc(benchmark::State& state) {
  const auto [p, g] = pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(srcc(p, g));
}

void BM_Logistic(benchmark::State& state) {
  const auto [p, g] = pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_logistic4(p, g).fit.beta1);
}

}  // namespace

BENCHMARK(BM_Srcc)->Arg(128)->Arg(1000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Logistic)->Arg(128)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
