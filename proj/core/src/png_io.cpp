#include "png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "parcelsense/errors.hpp"

namespace parcelsense::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw DataError("cannot open '" + path.string() + "'");
  }
  return f;
}

struct ErrorState {
  char message[256] = "libpng error";
};

void on_error(png_structp png_ptr, png_const_charp msg) {
  auto* state = static_cast<ErrorState*>(png_get_error_ptr(png_ptr));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png_ptr, 1);
}

void on_warning(png_structp, png_const_charp) {}

ColorKind kind_of(int color_type) {
  switch (color_type) {
    case PNG_COLOR_TYPE_GRAY: return ColorKind::Gray;
    case PNG_COLOR_TYPE_GRAY_ALPHA: return ColorKind::GrayAlpha;
    case PNG_COLOR_TYPE_RGB: return ColorKind::Rgb;
    case PNG_COLOR_TYPE_RGB_ALPHA: return ColorKind::Rgba;
    default: return ColorKind::Palette;
  }
}

// Everything between setjmp and the end of this function must be trivially
// destructible; buffers are owned by the caller.
bool read_impl(std::FILE* file, Decoded& out, std::vector<png_bytep>& rows,
               std::vector<std::uint8_t>& raw, ErrorState& err) {
  png_structp png_ptr = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_error, on_warning);
  if (!png_ptr) return false;
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (!info_ptr) {
    png_destroy_read_struct(&png_ptr, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png_ptr))) {
    png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
    return false;
  }
  png_init_io(png_ptr, file);
  png_read_info(png_ptr, info_ptr);
  out.width = static_cast<int>(png_get_image_width(png_ptr, info_ptr));
  out.height = static_cast<int>(png_get_image_height(png_ptr, info_ptr));
  out.bit_depth = png_get_bit_depth(png_ptr, info_ptr);
  out.color = kind_of(png_get_color_type(png_ptr, info_ptr));
  out.channels = png_get_channels(png_ptr, info_ptr);
  if (out.color == ColorKind::Palette || (out.bit_depth != 8 && out.bit_depth != 16)) {
    png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
    return true;
  }
  const std::size_t rowbytes = png_get_rowbytes(png_ptr, info_ptr);
  raw.resize(rowbytes * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = raw.data() + rowbytes * y;
  png_read_image(png_ptr, rows.data());
  png_read_end(png_ptr, nullptr);
  png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
  return true;
}

bool write_impl(std::FILE* file, int width, int height, int bit_depth, int color_type,
                std::vector<png_bytep>& rows, ErrorState& err) {
  png_structp png_ptr = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_error, on_warning);
  if (!png_ptr) return false;
  png_infop info_ptr = png_create_info_struct(png_ptr);
  if (!info_ptr) {
    png_destroy_write_struct(&png_ptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png_ptr))) {
    png_destroy_write_struct(&png_ptr, &info_ptr);
    return false;
  }
  png_init_io(png_ptr, file);
  png_set_IHDR(png_ptr, info_ptr, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png_ptr, info_ptr);
  png_write_image(png_ptr, rows.data());
  png_write_end(png_ptr, nullptr);
  png_destroy_write_struct(&png_ptr, &info_ptr);
  return true;
}

int color_type_for(int channels) {
  switch (channels) {
    case 1: return PNG_COLOR_TYPE_GRAY;
    case 2: return PNG_COLOR_TYPE_GRAY_ALPHA;
    case 3: return PNG_COLOR_TYPE_RGB;
    case 4: return PNG_COLOR_TYPE_RGB_ALPHA;
    default: throw DataError("unsupported band count " + std::to_string(channels));
  }
}

}  // namespace

Decoded read(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DataError("file not found: '" + path.string() + "'");
  }
  FilePtr file = open_file(path, "rb");
  unsigned char signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw DataError("malformed image '" + path.string() + "': not a PNG file");
  }
  std::rewind(file.get());

  Decoded out;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  ErrorState err;
  if (!read_impl(file.get(), out, rows, raw, err)) {
    throw DataError("malformed image '" + path.string() + "': " + err.message);
  }
  if (raw.empty()) return out;

  const std::size_t count =
      static_cast<std::size_t>(out.width) * out.height * static_cast<std::size_t>(out.channels);
  out.samples.resize(count);
  if (out.bit_depth == 8) {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = raw[i];
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  }
  return out;
}

void write8(const std::filesystem::path& path, int width, int height, int channels,
            const std::uint8_t* data) {
  const int color_type = color_type_for(channels);
  FilePtr file = open_file(path, "wb");
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(data + stride * y);
  ErrorState err;
  if (!write_impl(file.get(), width, height, 8, color_type, rows, err)) {
    throw DataError("cannot write '" + path.string() + "': " + err.message);
  }
}

void write16_gray(const std::filesystem::path& path, int width, int height,
                  const std::uint16_t* data) {
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> be(count * 2);
  for (std::size_t i = 0; i < count; ++i) {
    be[2 * i] = static_cast<std::uint8_t>(data[i] >> 8);
    be[2 * i + 1] = static_cast<std::uint8_t>(data[i] & 0xFF);
  }
  FilePtr file = open_file(path, "wb");
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[y] = be.data() + static_cast<std::size_t>(width) * 2 * y;
  ErrorState err;
  if (!write_impl(file.get(), width, height, 16, PNG_COLOR_TYPE_GRAY, rows, err)) {
    throw DataError("cannot write '" + path.string() + "': " + err.message);
  }
}

}  // namespace parcelsense::png
