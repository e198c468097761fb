#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wsrd/error.hpp"

namespace wsrd {

/// Row-major raster with `C` channels of pixel type `T`.
template <typename T, int C>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> data;  // size width*height*C

  Raster() = default;
  Raster(int w, int h, T fill = T{})
      : width(w), height(h),
        data(static_cast<std::size_t>(w) * h * C, fill) {}

  bool empty() const { return data.empty(); }

  T& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * C + c];
  }
  T at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * C + c];
  }
  bool contains(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  bool operator==(const Raster&) const = default;
};

using GrayImage8 = Raster<std::uint8_t, 1>;    // binary masks (0/255)
using GrayImage16 = Raster<std::uint16_t, 1>;  // depth in millimeters
using RgbImage8 = Raster<std::uint8_t, 3>;

}  // namespace wsrd
