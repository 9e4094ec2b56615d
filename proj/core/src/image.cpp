#include "advscene/image.hpp"

#include <algorithm>
#include <cmath>

namespace advscene {

ImageBuffer::ImageBuffer(int width, int height, double fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height * kChannels, fill) {}

std::uint8_t unit_to_byte(double x) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
}

}  // namespace advscene
