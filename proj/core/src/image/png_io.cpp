#include "wsrd/image/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

namespace wsrd {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T, int C>
void write_png_impl(const std::string& path, const Raster<T, C>& img,
                    int bit_depth, int color_type) {
  if (img.empty()) throw DataError("cannot write empty image: " + path);
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot open for writing: " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // raster is host little-endian

  std::vector<png_bytep> rows(img.height);
  auto* base = reinterpret_cast<png_bytep>(
      const_cast<T*>(img.data.data()));
  const std::size_t stride = std::size_t(img.width) * C * sizeof(T);
  for (int y = 0; y < img.height; ++y) rows[y] = base + y * stride;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

template <typename T, int C>
Raster<T, C> read_png_impl(const std::string& path, int want_depth,
                           int want_color) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open: " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png read failed: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    color = PNG_COLOR_TYPE_RGB;
  }
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (want_depth == 8 && depth == 16) png_set_strip_16(png);
  if (want_color == PNG_COLOR_TYPE_RGB && color == PNG_COLOR_TYPE_GRAY)
    png_set_gray_to_rgb(png);
  if (want_color == PNG_COLOR_TYPE_GRAY &&
      (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA))
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (want_depth == 16) {
    if (depth != 16) throw DataError("expected 16-bit png: " + path);
    png_set_swap(png);
  }
  png_read_update_info(png, info);

  Raster<T, C> img(int(png_get_image_width(png, info)),
                   int(png_get_image_height(png, info)));
  std::vector<png_bytep> rows(img.height);
  auto* base = reinterpret_cast<png_bytep>(img.data.data());
  const std::size_t stride = std::size_t(img.width) * C * sizeof(T);
  for (int y = 0; y < img.height; ++y) rows[y] = base + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace

void write_png(const std::string& path, const GrayImage8& img) {
  write_png_impl(path, img, 8, PNG_COLOR_TYPE_GRAY);
}
void write_png(const std::string& path, const GrayImage16& img) {
  write_png_impl(path, img, 16, PNG_COLOR_TYPE_GRAY);
}
void write_png(const std::string& path, const RgbImage8& img) {
  write_png_impl(path, img, 8, PNG_COLOR_TYPE_RGB);
}

GrayImage8 read_png_gray8(const std::string& path) {
  return read_png_impl<std::uint8_t, 1>(path, 8, PNG_COLOR_TYPE_GRAY);
}
GrayImage16 read_png_gray16(const std::string& path) {
  return read_png_impl<std::uint16_t, 1>(path, 16, PNG_COLOR_TYPE_GRAY);
}
RgbImage8 read_png_rgb8(const std::string& path) {
  return read_png_impl<std::uint8_t, 3>(path, 8, PNG_COLOR_TYPE_RGB);
}

}  // namespace wsrd
