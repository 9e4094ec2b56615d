#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace advscene {

// Interleaved H x W x 3 image, values normalized to [0, 1].
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
  double at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + ch;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// 8-bit <-> normalized conversions shared by the codecs and the gamma table.
inline double byte_to_unit(std::uint8_t v) { return v / 255.0; }
std::uint8_t unit_to_byte(double x);

}  // namespace advscene
