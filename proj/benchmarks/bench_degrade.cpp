#include <benchmark/benchmark.h>

#include "advscene/degrade.hpp"
#include "advscene/rng.hpp"

namespace {

using namespace advscene;

constexpr int kWidth = 1280;
constexpr int kHeight = 384;

ImageBuffer noise_image(std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(kWidth, kHeight);
  for (double& v : img.values()) v = rng.uniform();
  return img;
}

depth::DepthMap ramp_depth() {
  depth::DepthMap d(kWidth, kHeight);
  for (int r = 0; r < kHeight; ++r)
    for (int c = 0; c < kWidth; ++c) d.at(r, c) = 80.0 - 75.0 * r / kHeight;
  return d;
}

void BM_ApplyFog(benchmark::State& state) {
  const auto img = noise_image(1);
  const auto d = ramp_depth();
  const auto params = std::get<degrade::FogParams>(degrade::preset_by_name("thick_fog").params);
  for (auto _ : state) benchmark::DoNotOptimize(degrade::apply_fog(img, d, params));
  state.SetItemsProcessed(state.iterations() * kWidth * kHeight);
}
BENCHMARK(BM_ApplyFog)->Unit(benchmark::kMillisecond);

void BM_ApplyRain(benchmark::State& state) {
  const auto img = noise_image(2);
  const auto d = ramp_depth();
  const char* names[] = {"mod_rain", "heavy_rain", "dense_rain"};
  const auto params = std::get<degrade::RainParams>(degrade::preset_by_name(names[state.range(0)]).params);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(degrade::apply_rain(img, d, params, seed++));
  state.SetLabel(names[state.range(0)]);
}
BENCHMARK(BM_ApplyRain)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_LowLight(benchmark::State& state) {
  const auto img = noise_image(3);
  for (auto _ : state) benchmark::DoNotOptimize(degrade::apply_low_light(img, {2.5}));
}
BENCHMARK(BM_LowLight)->Unit(benchmark::kMillisecond);

}  // namespace
