#include "png_codec.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>

#include "advscene/error.hpp"

namespace advscene::detail {
namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_callback(png_structp) {}

void error_callback(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer) *buffer = message;
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::string context)
      : cursor_{bytes}, context_(std::move(context)) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
      fail("not a PNG stream");
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message_, error_callback,
                                  warning_callback);
    info_ = png_ ? png_create_info_struct(png_) : nullptr;
    if (!png_ || !info_) fail("libpng initialisation failed");
    png_set_read_fn(png_, &cursor_, read_callback);
  }

  ~Reader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  png_structp png() { return png_; }
  png_infop info() { return info_; }

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError((context_.empty() ? std::string("PNG decode: ") : context_ + ": ") + why);
  }
  const std::string& message() const { return message_; }

 private:
  ReadCursor cursor_;
  std::string context_;
  std::string message_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class Writer {
 public:
  Writer() {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message_, error_callback,
                                   warning_callback);
    info_ = png_ ? png_create_info_struct(png_) : nullptr;
    if (!png_ || !info_) throw Error("libpng initialisation failed");
    png_set_write_fn(png_, &out_, write_callback, flush_callback);
    png_set_compression_level(png_, 6);
    png_set_filter(png_, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
  }
  ~Writer() { png_destroy_write_struct(&png_, &info_); }
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  png_structp png() { return png_; }
  png_infop info() { return info_; }
  std::vector<std::uint8_t>& out() { return out_; }
  const std::string& message() const { return message_; }

 private:
  std::vector<std::uint8_t> out_;
  std::string message_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

}  // namespace

RasterRgb8 decode_png_rgb8(std::span<const std::uint8_t> bytes, const std::string& context) {
  Reader reader(bytes, context);
  RasterRgb8 raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(reader.png()))) {
    reader.fail(reader.message());
  }
  png_read_info(reader.png(), reader.info());
  const int color = png_get_color_type(reader.png(), reader.info());
  const int depth = png_get_bit_depth(reader.png(), reader.info());
  if (depth == 16) png_set_strip_16(reader.png());
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(reader.png());
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(reader.png());
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(reader.png());
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(reader.png());
  if (png_get_valid(reader.png(), reader.info(), PNG_INFO_tRNS)) png_set_strip_alpha(reader.png());
  png_read_update_info(reader.png(), reader.info());

  raster.width = static_cast<int>(png_get_image_width(reader.png(), reader.info()));
  raster.height = static_cast<int>(png_get_image_height(reader.png(), reader.info()));
  if (png_get_rowbytes(reader.png(), reader.info()) != static_cast<std::size_t>(raster.width) * 3) {
    reader.fail("unsupported pixel layout");
  }
  raster.pixels.resize(static_cast<std::size_t>(raster.width) * raster.height * 3);
  rows.resize(raster.height);
  for (int r = 0; r < raster.height; ++r) {
    rows[r] = raster.pixels.data() + static_cast<std::size_t>(r) * raster.width * 3;
  }
  png_read_image(reader.png(), rows.data());
  png_read_end(reader.png(), nullptr);
  return raster;
}

std::vector<std::uint8_t> encode_png_rgb8(const RasterRgb8& raster) {
  Writer writer;
  std::vector<png_bytep> rows(raster.height);
  for (int r = 0; r < raster.height; ++r) {
    rows[r] = const_cast<png_bytep>(raster.pixels.data() +
                                    static_cast<std::size_t>(r) * raster.width * 3);
  }
  if (setjmp(png_jmpbuf(writer.png()))) {
    throw Error("PNG encode: " + writer.message());
  }
  png_set_IHDR(writer.png(), writer.info(), raster.width, raster.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(writer.png(), writer.info());
  png_write_image(writer.png(), rows.data());
  png_write_end(writer.png(), nullptr);
  return std::move(writer.out());
}

RasterGray16 decode_png_gray16(std::span<const std::uint8_t> bytes, const std::string& context) {
  Reader reader(bytes, context);
  RasterGray16 raster;
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(reader.png()))) {
    reader.fail(reader.message());
  }
  png_read_info(reader.png(), reader.info());
  const int color = png_get_color_type(reader.png(), reader.info());
  const int depth = png_get_bit_depth(reader.png(), reader.info());
  if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
    reader.fail("expected a 16-bit single-channel PNG");
  }
  raster.width = static_cast<int>(png_get_image_width(reader.png(), reader.info()));
  raster.height = static_cast<int>(png_get_image_height(reader.png(), reader.info()));
  const std::size_t stride = static_cast<std::size_t>(raster.width) * 2;
  buffer.resize(stride * raster.height);
  rows.resize(raster.height);
  for (int r = 0; r < raster.height; ++r) rows[r] = buffer.data() + r * stride;
  png_read_image(reader.png(), rows.data());
  png_read_end(reader.png(), nullptr);

  // PNG stores 16-bit samples big-endian.
  raster.pixels.resize(static_cast<std::size_t>(raster.width) * raster.height);
  for (std::size_t i = 0; i < raster.pixels.size(); ++i) {
    raster.pixels[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
  }
  return raster;
}

std::vector<std::uint8_t> encode_png_gray16(const RasterGray16& raster) {
  Writer writer;
  const std::size_t stride = static_cast<std::size_t>(raster.width) * 2;
  std::vector<std::uint8_t> buffer(stride * raster.height);
  for (std::size_t i = 0; i < raster.pixels.size(); ++i) {
    buffer[2 * i] = static_cast<std::uint8_t>(raster.pixels[i] >> 8);
    buffer[2 * i + 1] = static_cast<std::uint8_t>(raster.pixels[i] & 0xff);
  }
  std::vector<png_bytep> rows(raster.height);
  for (int r = 0; r < raster.height; ++r) rows[r] = buffer.data() + r * stride;
  if (setjmp(png_jmpbuf(writer.png()))) {
    throw Error("PNG encode: " + writer.message());
  }
  png_set_IHDR(writer.png(), writer.info(), raster.width, raster.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(writer.png(), writer.info());
  png_write_image(writer.png(), rows.data());
  png_write_end(writer.png(), nullptr);
  return std::move(writer.out());
}

}  // namespace advscene::detail
