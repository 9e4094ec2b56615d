#pragma once

#include <algorithm>

// Synthetic KITTI-layout datasets for tests: gradient images, a LiDAR "corridor" of ground
// and wall points, a KITTI-like calibration and a few car labels.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "advscene/kitti_io.hpp"
#include "advscene/rng.hpp"

namespace advscene::testing {

inline kitti::CameraCalibration make_calibration(int width, int height) {
  kitti::CameraCalibration c;
  const double f = 0.55 * width;
  c.p2 << f, 0, 0.5 * width, 0,  //
      0, f, 0.5 * height, 0,     //
      0, 0, 1, 0;
  c.r0_rect.setIdentity();
  // LiDAR x forward, y left, z up -> camera x right, y down, z forward; sensor 1.7 m up.
  c.tr_velo_to_cam << 0, -1, 0, 0,  //
      0, 0, -1, -0.08,              //
      1, 0, 0, -0.27;
  return c;
}

inline kitti::PointCloud make_cloud(std::uint64_t seed, std::size_t count = 4000) {
  Rng rng(seed);
  kitti::PointCloud cloud;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = rng.uniform(2.0, 70.0);
    if (i % 3 == 0) {
      cloud.points.push_back({static_cast<float>(x), static_cast<float>(rng.uniform(-12, 12)), -1.7f, 0.3f});
    } else {
      const double side = (i % 3 == 1) ? 6.0 : -6.0;
      cloud.points.push_back({static_cast<float>(x), static_cast<float>(side),
                              static_cast<float>(rng.uniform(-1.7, 3.0)), 0.6f});
    }
  }
  return cloud;
}

inline ImageBuffer make_image(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const double base = 0.25 + 0.5 * (r + c * (ch + 1)) / (height + width * 3.0);
        img.at(r, c, ch) = std::round(std::clamp(base + rng.uniform(-0.1, 0.1), 0.0, 1.0) * 255.0) / 255.0;
      }
    }
  }
  return img;
}

inline kitti::ObjectLabel3D make_car(double x, double z, double ry, double top, double bottom) {
  kitti::ObjectLabel3D l;
  l.class_name = "Car";
  l.truncation = 0.0;
  l.occlusion = 0;
  l.alpha = -1.57;
  l.bbox = {100, top, 180, bottom};
  l.h = 1.52;
  l.w = 1.63;
  l.l = 3.88;
  l.x = x;
  l.y = 1.70;
  l.z = z;
  l.rotation_y = ry;
  return l;
}

inline std::vector<kitti::ObjectLabel3D> make_labels(int frame_id) {
  std::vector<kitti::ObjectLabel3D> labels = {
      make_car(-3.0 + 0.1 * frame_id, 15.0 + frame_id, -1.57, 150, 200),
      make_car(2.5, 28.0, 0.1 * frame_id, 170, 200),
  };
  kitti::ObjectLabel3D dc;
  dc.class_name = "DontCare";
  dc.truncation = -1;
  dc.occlusion = -1;
  dc.alpha = -10;
  dc.bbox = {500, 160, 540, 180};
  dc.h = dc.w = dc.l = -1;
  dc.x = dc.y = dc.z = -1000;
  dc.rotation_y = -10;
  labels.push_back(dc);
  return labels;
}

// Writes image_2, label_2, calib and velodyne for frames [0, frames).
inline void write_dataset(const std::filesystem::path& root, int frames, int width, int height,
                          std::uint64_t seed = 7, std::size_t cloud_points = 4000) {
  namespace fs = std::filesystem;
  for (const char* sub : {"image_2", "label_2", "calib", "velodyne"}) fs::create_directories(root / sub);
  const auto calib = make_calibration(width, height);
  for (int id = 0; id < frames; ++id) {
    kitti::write_file(kitti::image_path(root, id), kitti::write_image(make_image(width, height, seed + id)));
    const auto labels = make_labels(id);
    kitti::write_text_file(kitti::label_path(root, id), kitti::write_labels(labels));
    kitti::write_text_file(kitti::calib_path(root, id), kitti::write_calib(calib));
    const auto cloud = make_cloud(seed * 1000 + id, cloud_points);
    kitti::write_file(kitti::velodyne_path(root, id), kitti::write_point_cloud(cloud.points));
  }
}

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("advscene_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Every regular file under `root`, relative path -> bytes.
inline std::vector<std::pair<std::string, std::vector<std::uint8_t>>> snapshot_tree(
    const std::filesystem::path& root) {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files.emplace_back(std::filesystem::relative(e.path(), root).string(), kitti::read_file(e.path()));
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace advscene::testing
