#include <benchmark/benchmark.h>

#include "advscene/depth.hpp"
#include "advscene/rng.hpp"

namespace {

using namespace advscene;

// Roughly the density of a 64-beam scan projected into a 1280x384 frame.
depth::DepthMap sparse_map(double density) {
  Rng rng(5);
  depth::DepthMap d(1280, 384);
  for (double& v : d.values())
    if (rng.uniform() < density) v = rng.uniform(2.0, 80.0);
  return d;
}

void BM_Densify(benchmark::State& state) {
  const double density = state.range(0) / 1000.0;
  const auto sparse = sparse_map(density);
  for (auto _ : state) benchmark::DoNotOptimize(depth::densify(sparse, 64.0));
  state.SetLabel("density " + std::to_string(density));
}
BENCHMARK(BM_Densify)->Arg(5)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ProjectLidar(benchmark::State& state) {
  kitti::CameraCalibration calib;
  calib.p2 << 721.5, 0, 609.6, 44.9, 0, 721.5, 172.9, 0.2, 0, 0, 1, 0.003;
  calib.r0_rect.setIdentity();
  calib.tr_velo_to_cam << 0, -1, 0, 0, 0, 0, -1, -0.08, 1, 0, 0, -0.27;
  Rng rng(6);
  kitti::PointCloud cloud;
  for (int i = 0; i < 120000; ++i) {
    cloud.points.push_back({static_cast<float>(rng.uniform(-80, 80)), static_cast<float>(rng.uniform(-40, 40)),
                            static_cast<float>(rng.uniform(-2, 2)), 0.5f});
  }
  for (auto _ : state) benchmark::DoNotOptimize(depth::project_lidar_to_depth(cloud, calib, 1242, 375));
}
BENCHMARK(BM_ProjectLidar)->Unit(benchmark::kMillisecond);

void BM_EncodeDepth(benchmark::State& state) {
  const auto dense = depth::densify(sparse_map(0.05), 64.0);
  for (auto _ : state) benchmark::DoNotOptimize(depth::encode_depth(dense));
}
BENCHMARK(BM_EncodeDepth)->Unit(benchmark::kMillisecond);

}  // namespace
