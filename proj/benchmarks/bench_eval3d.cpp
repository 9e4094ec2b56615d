#include <benchmark/benchmark.h>

#include "advscene/eval3d.hpp"
#include "advscene/rng.hpp"

namespace {

using namespace advscene;

void BM_Iou3d(benchmark::State& state) {
  Rng rng(7);
  std::vector<std::pair<eval::Box3D, eval::Box3D>> pairs;
  for (int i = 0; i < 1024; ++i) {
    const eval::Box3D a{rng.uniform(-5, 5), 1.6, rng.uniform(10, 40), 1.5, 1.6, 3.9, rng.uniform(-3.2, 3.2)};
    const eval::Box3D b{a.x + rng.uniform(-2, 2), 1.6, a.z + rng.uniform(-2, 2), 1.5, 1.7, 4.1, rng.uniform(-3.2, 3.2)};
    pairs.emplace_back(a, b);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 1023];
    benchmark::DoNotOptimize(eval::iou_3d(a, b));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Iou3d);

void BM_Evaluate(benchmark::State& state) {
  Rng rng(8);
  const int frames = static_cast<int>(state.range(0));
  std::vector<eval::Frame> gt, pred;
  for (int f = 0; f < frames; ++f) {
    const auto id = kitti::frame_name(f);
    eval::Frame g{id, {}}, p{id, {}};
    for (int k = 0; k < 6; ++k) {
      kitti::ObjectLabel3D l;
      l.class_name = "Car";
      l.bbox = {100.0 * k, 150, 100.0 * k + 60, 150 + rng.uniform(20, 90)};
      l.occlusion = static_cast<int>(rng.uniform(0, 3));
      l.h = 1.5;
      l.w = 1.6;
      l.l = 3.9;
      l.x = -15 + 6.0 * k;
      l.y = 1.6;
      l.z = rng.uniform(8, 60);
      l.rotation_y = rng.uniform(-3, 3);
      g.labels.push_back(l);
      l.x += rng.normal(0, 0.2);
      l.z += rng.normal(0, 0.5);
      l.score = rng.uniform();
      p.labels.push_back(l);
    }
    gt.push_back(std::move(g));
    pred.push_back(std::move(p));
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::evaluate(gt, pred, {}));
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
