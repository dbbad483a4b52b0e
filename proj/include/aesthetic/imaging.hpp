#pragma once

#include <algorithm>
#include <csetjmp>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "aesthetic/error.hpp"

namespace aesthetic {

struct Rgb {
  std::uint8_t r{0};
  std::uint8_t g{0};
  std::uint8_t b{0};

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Decoded 8-bit RGB image, row-major, three bytes per pixel.
class Raster {
 public:
  Raster(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ == 0 || height_ == 0) {
      throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
    if (pixels_.size() != 3 * width_ * height_) {
      throw Error(ErrorCode::DimensionMismatch, "pixel buffer length is not 3*w*h");
    }
  }

  static Raster filled(std::size_t width, std::size_t height, Rgb color) {
    std::vector<std::uint8_t> px(3 * width * height);
    for (std::size_t i = 0; i < width * height; ++i) {
      px[3 * i] = color.r;
      px[3 * i + 1] = color.g;
      px[3 * i + 2] = color.b;
    }
    return Raster(width, height, std::move(px));
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }

  Rgb at(std::size_t x, std::size_t y) const noexcept { return pixel(y * width_ + x); }

  // Linear index in row-major order.
  Rgb pixel(std::size_t index) const noexcept {
    const std::uint8_t* p = pixels_.data() + 3 * index;
    return {p[0], p[1], p[2]};
  }

  void set(std::size_t x, std::size_t y, Rgb c) noexcept {
    std::uint8_t* p = pixels_.data() + 3 * (y * width_ + x);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> pixels_;
};

/// hue in degrees [0,360), saturation in [0,1], value = max channel on 0..255.
struct HsvPixel {
  double hue{0.0};
  double saturation{0.0};
  double value{0.0};
};

/// lightness = (max+min)/2 on 0..255.
struct HslPixel {
  double hue{0.0};
  double saturation{0.0};
  double lightness{0.0};
};

namespace detail {

inline double hexcone_hue(int r, int g, int b, int max, int delta) {
  if (delta == 0) return 0.0;
  double h;
  if (max == r) {
    h = 60.0 * static_cast<double>(g - b) / delta;
  } else if (max == g) {
    h = 60.0 * (static_cast<double>(b - r) / delta + 2.0);
  } else {
    h = 60.0 * (static_cast<double>(r - g) / delta + 4.0);
  }
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

}  // namespace detail

inline HsvPixel rgb_to_hsv(Rgb p) {
  const int r = p.r, g = p.g, b = p.b;
  const int max = std::max({r, g, b});
  const int min = std::min({r, g, b});
  const int delta = max - min;
  HsvPixel out;
  out.hue = detail::hexcone_hue(r, g, b, max, delta);
  out.saturation = max == 0 ? 0.0 : static_cast<double>(delta) / max;
  out.value = max;
  return out;
}

inline HslPixel rgb_to_hsl(Rgb p) {
  const int r = p.r, g = p.g, b = p.b;
  const int max = std::max({r, g, b});
  const int min = std::min({r, g, b});
  const int delta = max - min;
  HslPixel out;
  out.hue = detail::hexcone_hue(r, g, b, max, delta);
  out.lightness = (max + min) / 2.0;
  if (delta != 0) {
    // delta / (1 - |2L - 1|) with L on a 0..1 scale, written on 0..255.
    const int denom = 255 - std::abs(max + min - 255);
    out.saturation = std::min(1.0, static_cast<double>(delta) / denom);
  }
  return out;
}

/// Rec. 601 luma on 0..255.
inline double luma(Rgb p) { return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b; }

// ---------------------------------------------------------------------------
// Codecs

namespace detail {

struct PngReadState {
  const unsigned char* data;
  std::size_t size;
  std::size_t pos;
  char message[200];
};

struct PngWriteState {
  std::vector<std::uint8_t>* out;
  char message[200];
};

inline void png_read_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (src->pos + n > src->size) png_error(png, "unexpected end of stream");
  std::memcpy(out, src->data + src->pos, n);
  src->pos += n;
}

inline void png_write_memory(png_structp png, png_bytep in, png_size_t n) {
  auto* dst = static_cast<PngWriteState*>(png_get_io_ptr(png));
  dst->out->insert(dst->out->end(), in, in + n);
}

inline void png_flush_noop(png_structp) {}

template <typename State>
void png_fail(png_structp png, png_const_charp msg) {
  auto* state = static_cast<State*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(png_jmpbuf(png), 1);
}

inline void png_quiet(png_structp, png_const_charp) {}

// Only trivially destructible locals live in this frame across setjmp.
inline bool png_decode_raw(PngReadState& state, std::vector<std::uint8_t>& out,
                           std::vector<png_bytep>& rows, std::size_t& width, std::size_t& height) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state,
                                           &png_fail<PngReadState>, &png_quiet);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &state, &png_read_memory);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  if (png_get_rowbytes(png, info) != 3 * static_cast<std::size_t>(w)) {
    png_error(png, "unexpected row layout");
  }
  out.resize(3 * static_cast<std::size_t>(w) * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.data() + 3 * static_cast<std::size_t>(w) * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  width = w;
  height = h;
  return true;
}

inline bool png_encode_raw(PngWriteState& state, const std::uint8_t* pixels, std::size_t width,
                           std::size_t height, int channels, std::vector<png_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state,
                                            &png_fail<PngWriteState>, &png_quiet);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &state, &png_write_memory, &png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  rows.resize(height);
  for (std::size_t y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(pixels + y * width * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct JpegErrorState {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorState*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Warnings (premature EOF, corrupt entropy data) are promoted to failures.
inline void jpeg_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_fail(cinfo);
}

inline bool jpeg_decode_raw(JpegErrorState& err, const unsigned char* data, std::size_t size,
                            std::vector<std::uint8_t>& out, std::size_t& width,
                            std::size_t& height) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = &jpeg_fail;
  err.base.emit_message = &jpeg_message;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  if (cinfo.output_components != 3) {
    std::snprintf(err.message, sizeof(err.message), "unexpected component count");
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  const std::size_t stride = 3 * static_cast<std::size_t>(cinfo.output_width);
  out.resize(stride * cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  width = cinfo.output_width;
  height = cinfo.output_height;
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
inline constexpr unsigned char kJpegSignature[3] = {0xFF, 0xD8, 0xFF};

inline bool has_prefix(std::span<const std::uint8_t> bytes, std::span<const unsigned char> sig) {
  const std::size_t n = std::min(bytes.size(), sig.size());
  return std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n), sig.begin());
}

}  // namespace detail

/// Decodes a PNG or JPEG stream into 8-bit RGB. Alpha is dropped, grayscale
/// and palette images are expanded, 16-bit samples are reduced to 8 bits.
inline Raster decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(ErrorCode::UnsupportedFormat, "empty stream");

  const bool png_like = detail::has_prefix(bytes, detail::kPngSignature);
  const bool jpeg_like = detail::has_prefix(bytes, detail::kJpegSignature);
  if (!png_like && !jpeg_like) {
    throw Error(ErrorCode::UnsupportedFormat, "not a PNG or JPEG stream");
  }

  std::vector<std::uint8_t> pixels;
  std::size_t width = 0;
  std::size_t height = 0;
  if (png_like) {
    if (bytes.size() < sizeof(detail::kPngSignature)) {
      throw Error(ErrorCode::CorruptStream, "truncated PNG signature");
    }
    detail::PngReadState state{bytes.data(), bytes.size(), 0, {}};
    std::vector<png_bytep> rows;
    if (!detail::png_decode_raw(state, pixels, rows, width, height)) {
      throw Error(ErrorCode::CorruptStream, std::string("PNG: ") + state.message);
    }
  } else {
    if (bytes.size() < sizeof(detail::kJpegSignature)) {
      throw Error(ErrorCode::CorruptStream, "truncated JPEG signature");
    }
    detail::JpegErrorState err{};
    if (!detail::jpeg_decode_raw(err, bytes.data(), bytes.size(), pixels, width, height)) {
      throw Error(ErrorCode::CorruptStream, std::string("JPEG: ") + err.message);
    }
  }
  if (width == 0 || height == 0) throw Error(ErrorCode::CorruptStream, "zero-sized image");
  return Raster(width, height, std::move(pixels));
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

inline Raster load_image(const std::filesystem::path& path) {
  return decode_image(read_file_bytes(path));
}

/// Encodes 8-bit pixels (1 = gray, 3 = RGB) as PNG.
inline std::vector<std::uint8_t> encode_png(std::span<const std::uint8_t> pixels, std::size_t width,
                                            std::size_t height, int channels) {
  if ((channels != 1 && channels != 3) || pixels.size() != width * height * channels ||
      width == 0 || height == 0) {
    throw Error(ErrorCode::InvalidArgument, "encode_png: bad buffer geometry");
  }
  std::vector<std::uint8_t> out;
  detail::PngWriteState state{&out, {}};
  std::vector<png_bytep> rows;
  if (!detail::png_encode_raw(state, pixels.data(), width, height, channels, rows)) {
    throw Error(ErrorCode::IoError, std::string("PNG encode: ") + state.message);
  }
  return out;
}

inline std::vector<std::uint8_t> encode_png(const Raster& image) {
  return encode_png(image.bytes(), image.width(), image.height(), 3);
}

}  // namespace aesthetic
