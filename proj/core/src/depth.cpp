#include "advscene/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advscene/error.hpp"
#include "png_codec.hpp"

namespace advscene::depth {

std::size_t DepthMap::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return !(v > 0); }));
}

Eigen::Vector3d lidar_to_camera(const kitti::LidarPoint& p, const kitti::CameraCalibration& calib) {
  const Eigen::Vector4d velo(p.x, p.y, p.z, 1.0);
  return calib.r0_rect * (calib.tr_velo_to_cam * velo);
}

DepthMap project_lidar_to_depth(const kitti::PointCloud& cloud,
                                const kitti::CameraCalibration& calib, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("depth map dimensions must be positive");
  DepthMap out(width, height);
  for (const auto& point : cloud.points) {
    const Eigen::Vector3d cam = lidar_to_camera(point, calib);
    if (!(cam.z() > kMinCameraDepth)) continue;
    const Eigen::Vector3d img = calib.p2.leftCols<3>() * cam + calib.p2.col(3);
    const double u = img.x() / img.z();
    const double v = img.y() / img.z();
    if (!std::isfinite(u) || !std::isfinite(v)) continue;
    const double col = std::floor(u + 0.5);
    const double row = std::floor(v + 0.5);
    if (col < 0 || row < 0 || col >= width || row >= height) continue;
    double& slot = out.at(static_cast<int>(row), static_cast<int>(col));
    if (!(slot > 0) || cam.z() < slot) slot = cam.z();
  }
  return out;
}

DepthMap densify(const DepthMap& sparse, double max_radius, double fill_value) {
  if (max_radius < 0) throw InvalidArgument("max_radius must be >= 0");
  if (!(fill_value > 0)) throw InvalidArgument("fill_value must be > 0");
  const int w = sparse.width();
  const int h = sparse.height();
  constexpr int kNone = -1;

  // Per column, the nearest present row to every row (ties -> smaller row).
  std::vector<int> nearest_row(static_cast<std::size_t>(w) * h, kNone);
  auto nr = [&](int row, int col) -> int& { return nearest_row[static_cast<std::size_t>(row) * w + col]; };
  for (int c = 0; c < w; ++c) {
    int last = kNone;
    for (int r = 0; r < h; ++r) {
      if (sparse.present(r, c)) last = r;
      nr(r, c) = last;
    }
    int next = kNone;
    for (int r = h - 1; r >= 0; --r) {
      if (sparse.present(r, c)) next = r;
      const int above = nr(r, c);
      if (next != kNone && (above == kNone || next - r < r - above)) nr(r, c) = next;
    }
  }

  const double radius_sq = max_radius * max_radius;
  DepthMap out = sparse;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (sparse.present(r, c)) continue;
      // Scan columns outward; stop once the horizontal offset alone exceeds the best.
      long long best_d2 = std::numeric_limits<long long>::max();
      int best_r = kNone, best_c = kNone;
      auto consider = [&](int cc) {
        const int rr = nr(r, cc);
        if (rr == kNone) return;
        const long long dr = rr - r, dc = cc - c;
        const long long d2 = dr * dr + dc * dc;
        if (d2 < best_d2 || (d2 == best_d2 && (rr < best_r || (rr == best_r && cc < best_c)))) {
          best_d2 = d2;
          best_r = rr;
          best_c = cc;
        }
      };
      for (int off = 0; off < w; ++off) {
        const long long off2 = static_cast<long long>(off) * off;
        if (off2 > best_d2 || static_cast<double>(off2) > radius_sq) break;
        if (c - off >= 0) consider(c - off);
        if (off > 0 && c + off < w) consider(c + off);
      }
      if (best_r != kNone && static_cast<double>(best_d2) <= radius_sq) {
        out.at(r, c) = sparse.at(best_r, best_c);
      } else {
        out.at(r, c) = fill_value;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_depth(const DepthMap& depth) {
  detail::RasterGray16 raster{depth.width(), depth.height(), {}};
  raster.pixels.reserve(depth.values().size());
  for (double m : depth.values()) {
    if (!(m > 0)) {
      raster.pixels.push_back(0);
      continue;
    }
    const double stored = std::round(m * 256.0);
    if (!(stored <= 65535.0)) {
      throw InvalidArgument("depth " + std::to_string(m) + " m overflows the 16-bit encoding");
    }
    raster.pixels.push_back(static_cast<std::uint16_t>(stored));
  }
  return detail::encode_png_gray16(raster);
}

DepthMap decode_depth(std::span<const std::uint8_t> bytes, const std::string& context) {
  const auto raster = detail::decode_png_gray16(bytes, context);
  DepthMap out(raster.width, raster.height);
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = raster.pixels[i] / 256.0;
  return out;
}

}  // namespace advscene::depth
