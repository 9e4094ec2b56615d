#pragma once

// Per-pixel scene depth: LiDAR projection, nearest-neighbour densification and the
// 16-bit (meters x 256) raster encoding.

#include <cstdint>
#include <span>
#include <vector>

#include "advscene/kitti_io.hpp"

namespace advscene::depth {

// Points closer than this to the image plane are discarded during projection.
inline constexpr double kMinCameraDepth = 0.1;
inline constexpr double kDefaultFillValue = 80.0;

// Row-major H x W depth in meters. Values <= 0 mean "missing".
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, double fill = 0.0)
      : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }

  double& at(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  bool present(int row, int col) const { return at(row, col) > 0; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t missing_count() const;
  bool dense() const { return missing_count() == 0; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// Rectified-camera-frame position of a LiDAR point: R0_rect * Tr_velo_to_cam * [p; 1].
Eigen::Vector3d lidar_to_camera(const kitti::LidarPoint& p, const kitti::CameraCalibration& calib);

// Sparse depth; collisions keep the nearest surface.
DepthMap project_lidar_to_depth(const kitti::PointCloud& cloud,
                                const kitti::CameraCalibration& calib, int width, int height);

// Fills missing pixels from the nearest present pixel within `max_radius` (Euclidean,
// ties to the smaller row then column); pixels with no such neighbour get `fill_value`.
DepthMap densify(const DepthMap& sparse, double max_radius, double fill_value = kDefaultFillValue);

// 16-bit grayscale PNG, stored = round(m * 256), 0 = missing.
std::vector<std::uint8_t> encode_depth(const DepthMap& depth);
DepthMap decode_depth(std::span<const std::uint8_t> bytes, const std::string& context = "");

}  // namespace advscene::depth
