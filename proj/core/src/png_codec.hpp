#pragma once

// Thin libpng wrappers over in-memory buffers. Encoding parameters are fixed so the
// same pixels always produce the same bytes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace advscene::detail {

struct RasterRgb8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB
};

struct RasterGray16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;  // row-major
};

RasterRgb8 decode_png_rgb8(std::span<const std::uint8_t> bytes, const std::string& context);
std::vector<std::uint8_t> encode_png_rgb8(const RasterRgb8& raster);

RasterGray16 decode_png_gray16(std::span<const std::uint8_t> bytes, const std::string& context);
std::vector<std::uint8_t> encode_png_gray16(const RasterGray16& raster);

}  // namespace advscene::detail
