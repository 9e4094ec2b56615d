#pragma once

// Readers and writers for the KITTI object-detection on-disk formats.

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advscene/image.hpp"

namespace advscene::kitti {

struct CameraCalibration {
  Eigen::Matrix<double, 3, 4> p2 = Eigen::Matrix<double, 3, 4>::Zero();
  Eigen::Matrix3d r0_rect = Eigen::Matrix3d::Identity();
  Eigen::Matrix<double, 3, 4> tr_velo_to_cam = Eigen::Matrix<double, 3, 4>::Zero();

  // Positive focal lengths and an orthonormal (within 1e-3) rectification.
  bool valid() const;
};

struct BBox2D {
  double left = 0, top = 0, right = 0, bottom = 0;

  double height() const { return bottom - top; }
  double area() const { return (right - left) * (bottom - top); }
  friend bool operator==(const BBox2D&, const BBox2D&) = default;
};

struct ObjectLabel3D {
  std::string class_name;
  double truncation = 0;
  int occlusion = 0;
  double alpha = 0;
  BBox2D bbox;
  double h = 0, w = 0, l = 0;       // meters
  double x = 0, y = 0, z = 0;       // camera frame, y is the bottom face
  double rotation_y = 0;            // radians
  std::optional<double> score;      // present for detector output

  bool is_dont_care() const { return class_name == "DontCare"; }
  // Checks the geometric invariants; DontCare records are always accepted.
  bool valid() const;

  friend bool operator==(const ObjectLabel3D&, const ObjectLabel3D&) = default;
};

struct LidarPoint {
  float x, y, z, reflectance;
  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

struct PointCloud {
  std::vector<LidarPoint> points;
  std::size_t dropped_non_finite = 0;
};

// Accepts 15-field ground-truth and 16-field prediction lines; blank lines are skipped.
std::vector<ObjectLabel3D> parse_labels(std::string_view text);
// Fixed two-decimal formatting; the score (if any) is emitted as a 16th field.
std::string write_labels(std::span<const ObjectLabel3D> records);

CameraCalibration parse_calib(std::string_view text);
std::string write_calib(const CameraCalibration& calib);

PointCloud read_point_cloud(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_point_cloud(std::span<const LidarPoint> points);

// 8-bit RGB PNG. Gray and RGBA inputs are expanded / stripped to RGB.
ImageBuffer read_image(std::span<const std::uint8_t> bytes, const std::string& context = "");
std::vector<std::uint8_t> write_image(const ImageBuffer& image);

// Directory layout helpers: image_2/NNNNNN.png, label_2/NNNNNN.txt, calib/NNNNNN.txt,
// velodyne/NNNNNN.bin.
std::string frame_name(int frame_id);
std::filesystem::path image_path(const std::filesystem::path& root, int frame_id);
std::filesystem::path label_path(const std::filesystem::path& root, int frame_id);
std::filesystem::path calib_path(const std::filesystem::path& root, int frame_id);
std::filesystem::path velodyne_path(const std::filesystem::path& root, int frame_id);

// Sorted frame ids found as six-digit stems with `extension` inside `dir`.
std::vector<int> list_frames(const std::filesystem::path& dir, std::string_view extension);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace advscene::kitti
