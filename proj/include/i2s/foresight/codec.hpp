#pragma once

#include "i2s/core/image.hpp"

#include <png.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace i2s::foresight {

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (std::uint8_t(bytes[i]) << 16) | (std::uint8_t(bytes[i + 1]) << 8) | std::uint8_t(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t n = std::uint8_t(bytes[i]) << 16;
    if (i + 1 < bytes.size()) n |= std::uint8_t(bytes[i + 1]) << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::string base64_decode(std::string_view text) {
  static const auto kTable = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    const char* a = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(a[i])] = i;
    return t;
  }();
  if (text.size() % 4 != 0) throw CodecError("base64: length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        vals[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw CodecError("base64: data after padding");
      vals[k] = kTable[static_cast<unsigned char>(c)];
      if (vals[k] < 0) throw CodecError("base64: invalid character");
    }
    const std::uint32_t n = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
    out += static_cast<char>((n >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((n >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(n & 0xff);
  }
  return out;
}

namespace detail {

struct ReadCursor {
  std::string_view data;
  std::size_t pos = 0;
};

inline void png_error_fn(png_structp png, png_const_charp msg) {
  *static_cast<std::string*>(png_get_error_ptr(png)) = msg;
  png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace detail

/// 8-bit grayscale PNG. Intensities are rounded to the nearest 1/255 level.
inline std::string encode_png(const ImageBuffer& img) {
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, detail::png_error_fn, detail::png_warning_fn);
  if (!png) throw CodecError("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  std::string out;
  std::vector<png_byte> row(static_cast<std::size_t>(img.width()));
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw CodecError("png encode: " + error);
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u)
      row[static_cast<std::size_t>(u)] = static_cast<png_byte>(std::lround(std::clamp(img(u, v), 0.0, 1.0) * 255.0));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

/// Decodes any PNG to grayscale (RGB is averaged) and attaches the given intrinsics.
inline ImageBuffer decode_png(std::string_view bytes, const Intrinsics& intr) {
  if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0)
    throw CodecError("png: bad signature");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, detail::png_error_fn, detail::png_warning_fn);
  if (!png) throw CodecError("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  detail::ReadCursor cursor{bytes, 0};
  std::vector<png_byte> rgb;
  png_uint_32 width = 0, height = 0;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw CodecError("png decode: " + error);
  }
  png_set_read_fn(png, &cursor, [](png_structp p, png_bytep out, png_size_t n) {
    auto* c = static_cast<detail::ReadCursor*>(png_get_io_ptr(p));
    if (c->pos + n > c->data.size()) png_error(p, "truncated data");
    std::memcpy(out, c->data.data() + c->pos, n);
    c->pos += n;
  });
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  for (png_uint_32 v = 0; v < height; ++v) png_read_row(png, rgb.data() + static_cast<std::size_t>(v) * width * 3, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (static_cast<int>(width) != intr.width || static_cast<int>(height) != intr.height)
    throw CodecError("png: image size does not match intrinsics");
  return from_rgb(rgb, intr);
}

}  // namespace i2s::foresight
