#include "advscene/kitti_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>

#include "advscene/error.hpp"
#include "png_codec.hpp"

namespace advscene::kitti {
namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_number(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

bool parse_integer(std::string_view token, int& out) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    std::string_view line = text.substr(0, end);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
}

}  // namespace

bool CameraCalibration::valid() const {
  if (!(p2(0, 0) > 0) || !(p2(1, 1) > 0)) return false;
  const Eigen::Matrix3d gram = r0_rect * r0_rect.transpose();
  return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-3;
}

bool ObjectLabel3D::valid() const {
  if (is_dont_care()) return true;
  return bbox.right > bbox.left && bbox.bottom > bbox.top && h > 0 && w > 0 && l > 0 &&
         rotation_y >= -std::numbers::pi && rotation_y <= std::numbers::pi;
}

std::vector<ObjectLabel3D> parse_labels(std::string_view text) {
  std::vector<ObjectLabel3D> records;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_whitespace(line);
    if (fields.empty()) return;
    if (fields.size() != 15 && fields.size() != 16) {
      throw ParseError("expected 15 or 16 fields, got " + std::to_string(fields.size()), line_no);
    }
    double v[15] = {};
    for (std::size_t i = 1; i < 15; ++i) {
      if (i == 2) continue;
      if (!parse_number(fields[i], v[i])) {
        throw ParseError("field " + std::to_string(i + 1) + " is not numeric: '" +
                             std::string(fields[i]) + "'",
                         line_no);
      }
    }
    ObjectLabel3D rec;
    rec.class_name = std::string(fields[0]);
    rec.truncation = v[1];
    if (!parse_integer(fields[2], rec.occlusion)) {
      double occ = 0;
      if (!parse_number(fields[2], occ) || occ != std::floor(occ)) {
        throw ParseError("occlusion is not an integer: '" + std::string(fields[2]) + "'", line_no);
      }
      rec.occlusion = static_cast<int>(occ);
    }
    rec.alpha = v[3];
    rec.bbox = {v[4], v[5], v[6], v[7]};
    rec.h = v[8];
    rec.w = v[9];
    rec.l = v[10];
    rec.x = v[11];
    rec.y = v[12];
    rec.z = v[13];
    rec.rotation_y = v[14];
    if (fields.size() == 16) {
      double s = 0;
      if (!parse_number(fields[15], s)) {
        throw ParseError("score is not numeric: '" + std::string(fields[15]) + "'", line_no);
      }
      rec.score = s;
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::string write_labels(std::span<const ObjectLabel3D> records) {
  std::string out;
  char buf[512];
  for (const auto& r : records) {
    int n = std::snprintf(buf, sizeof(buf),
                          "%s %.2f %d %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f",
                          r.class_name.c_str(), r.truncation, r.occlusion, r.alpha, r.bbox.left,
                          r.bbox.top, r.bbox.right, r.bbox.bottom, r.h, r.w, r.l, r.x, r.y, r.z,
                          r.rotation_y);
    out.append(buf, static_cast<std::size_t>(n));
    if (r.score) {
      n = std::snprintf(buf, sizeof(buf), " %.4f", *r.score);
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

CameraCalibration parse_calib(std::string_view text) {
  std::map<std::string, std::vector<double>, std::less<>> entries;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) return;
    const auto key_fields = split_whitespace(line.substr(0, colon));
    if (key_fields.size() != 1) return;
    const std::string_view key = key_fields[0];
    if (key != "P2" && key != "R0_rect" && key != "Tr_velo_to_cam") return;
    std::vector<double> values;
    for (auto token : split_whitespace(line.substr(colon + 1))) {
      double v = 0;
      if (!parse_number(token, v)) {
        throw ParseError(std::string(key) + ": non-numeric value '" + std::string(token) + "'",
                         line_no);
      }
      values.push_back(v);
    }
    const std::size_t expected = key == "R0_rect" ? 9 : 12;
    if (values.size() != expected) {
      throw ParseError(std::string(key) + ": expected " + std::to_string(expected) +
                           " values, got " + std::to_string(values.size()),
                       line_no);
    }
    entries[std::string(key)] = std::move(values);
  });

  for (const char* key : {"P2", "R0_rect", "Tr_velo_to_cam"}) {
    if (!entries.contains(key)) throw ParseError(std::string("missing calibration key ") + key);
  }
  CameraCalibration calib;
  const auto& p2 = entries["P2"];
  const auto& r0 = entries["R0_rect"];
  const auto& tr = entries["Tr_velo_to_cam"];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      calib.p2(r, c) = p2[r * 4 + c];
      calib.tr_velo_to_cam(r, c) = tr[r * 4 + c];
    }
    for (int c = 0; c < 3; ++c) calib.r0_rect(r, c) = r0[r * 3 + c];
  }
  return calib;
}

std::string write_calib(const CameraCalibration& calib) {
  std::string out;
  char buf[64];
  auto emit = [&](const char* key, const auto& m) {
    out += key;
    out += ':';
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), " %.12e", m(r, c));
        out += buf;
      }
    }
    out += '\n';
  };
  emit("P2", calib.p2);
  emit("R0_rect", calib.r0_rect);
  emit("Tr_velo_to_cam", calib.tr_velo_to_cam);
  return out;
}

PointCloud read_point_cloud(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 16 != 0) {
    throw ParseError("point cloud length " + std::to_string(bytes.size()) +
                     " is not a multiple of 16 bytes");
  }
  auto read_f32 = [&](std::size_t offset) {
    const std::uint32_t bits = static_cast<std::uint32_t>(bytes[offset]) |
                               static_cast<std::uint32_t>(bytes[offset + 1]) << 8 |
                               static_cast<std::uint32_t>(bytes[offset + 2]) << 16 |
                               static_cast<std::uint32_t>(bytes[offset + 3]) << 24;
    return std::bit_cast<float>(bits);
  };
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const LidarPoint p{read_f32(off), read_f32(off + 4), read_f32(off + 8), read_f32(off + 12)};
    if (std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) &&
        std::isfinite(p.reflectance)) {
      cloud.points.push_back(p);
    } else {
      ++cloud.dropped_non_finite;
    }
  }
  return cloud;
}

std::vector<std::uint8_t> write_point_cloud(std::span<const LidarPoint> points) {
  std::vector<std::uint8_t> out;
  out.reserve(points.size() * 16);
  auto put = [&](float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(bits >> s));
  };
  for (const auto& p : points) {
    put(p.x);
    put(p.y);
    put(p.z);
    put(p.reflectance);
  }
  return out;
}

ImageBuffer read_image(std::span<const std::uint8_t> bytes, const std::string& context) {
  const auto raster = detail::decode_png_rgb8(bytes, context);
  ImageBuffer image(raster.width, raster.height);
  auto values = image.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = byte_to_unit(raster.pixels[i]);
  return image;
}

std::vector<std::uint8_t> write_image(const ImageBuffer& image) {
  detail::RasterRgb8 raster{image.width(), image.height(), {}};
  raster.pixels.reserve(image.size());
  for (double v : image.values()) raster.pixels.push_back(unit_to_byte(v));
  return detail::encode_png_rgb8(raster);
}

std::string frame_name(int frame_id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", frame_id);
  return buf;
}

std::filesystem::path image_path(const std::filesystem::path& root, int frame_id) {
  return root / "image_2" / (frame_name(frame_id) + ".png");
}
std::filesystem::path label_path(const std::filesystem::path& root, int frame_id) {
  return root / "label_2" / (frame_name(frame_id) + ".txt");
}
std::filesystem::path calib_path(const std::filesystem::path& root, int frame_id) {
  return root / "calib" / (frame_name(frame_id) + ".txt");
}
std::filesystem::path velodyne_path(const std::filesystem::path& root, int frame_id) {
  return root / "velodyne" / (frame_name(frame_id) + ".bin");
}

std::vector<int> list_frames(const std::filesystem::path& dir, std::string_view extension) {
  std::vector<int> ids;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != extension) continue;
    const std::string stem = entry.path().stem().string();
    if (stem.size() != 6) continue;
    int id = 0;
    const auto [ptr, err] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
    if (err == std::errc() && ptr == stem.data() + stem.size() && id >= 0) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace advscene::kitti
