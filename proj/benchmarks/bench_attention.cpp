#include <benchmark/benchmark.h>

#include "advscene/attention.hpp"
#include "advscene/rng.hpp"

namespace {

using namespace advscene;

attn::FeatureMap random_map(int h, int w, int c) {
  Rng rng(9);
  attn::FeatureMap map(h, w, c);
  for (Eigen::Index i = 0; i < map.tokens().size(); ++i) map.tokens().data()[i] = rng.normal(0, 1);
  return map;
}

// Stage-1 sized grid for a 1280x384 input with 4x4 patches.
void BM_WindowAttention(benchmark::State& state) {
  const int shift = static_cast<int>(state.range(0));
  const auto map = random_map(96, 320, 32);
  const auto params = attn::random_attention_params(32, 4, 8, 1);
  for (auto _ : state) benchmark::DoNotOptimize(attn::window_attention(map, params, {8, shift}));
}
BENCHMARK(BM_WindowAttention)->Arg(0)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SwinBlockPair(benchmark::State& state) {
  const auto map = random_map(48, 160, 64);
  const auto params = attn::random_block_pair_params(64, 4, 8, 2);
  for (auto _ : state) benchmark::DoNotOptimize(attn::swin_block_pair(map, params, 8));
}
BENCHMARK(BM_SwinBlockPair)->Unit(benchmark::kMillisecond);

void BM_CrossAttention(benchmark::State& state) {
  const auto memory = random_map(12, 40, 256);
  const auto params = attn::random_attention_params(256, 8, 0, 3);
  Rng rng(4);
  attn::Matrix queries(static_cast<Eigen::Index>(state.range(0)), 256);
  for (Eigen::Index i = 0; i < queries.size(); ++i) queries.data()[i] = rng.normal(0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(attn::cross_attention(queries, memory, params));
}
BENCHMARK(BM_CrossAttention)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
