#include <benchmark/benchmark.h>

#include "vra/fusion.hpp"
#include "vra/handcrafted.hpp"
#include "vra/random.hpp"

using namespace vra;

namespace {

LumaImage noise_image(int w, int h) {
  SplitMix64 r(11);
  LumaImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = 128.0 + 30.0 * r.normal();
  return img;
}

void BM_Brisque(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(brisque_frame(img).front());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

void BM_Gmlog(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gmlog_frame(img).front());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

void BM_Mscn(benchmark::State& state) {
  const auto img = noise_image(256, 256);
  for (auto _ : state) benchmark::DoNotOptimize(mscn(img).at(0, 0));
}

void BM_FuseVideo(benchmark::State& state) {
  const std::vector<LumaImage> frames(8, noise_image(128, 128));
  const auto m = extract_video(HandcraftedModel::kBrisque, frames, "v", 1);
  for (auto _ : state) benchmark::DoNotOptimize(fuse_mean_std(m).values.front());
}

}  // namespace

BENCHMARK(BM_Brisque)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gmlog)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mscn)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FuseVideo)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
