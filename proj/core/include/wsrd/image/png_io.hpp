#pragma once

#include <string>

#include "wsrd/image/image.hpp"

namespace wsrd {

void write_png(const std::string& path, const GrayImage8& img);
void write_png(const std::string& path, const GrayImage16& img);
void write_png(const std::string& path, const RgbImage8& img);

GrayImage8 read_png_gray8(const std::string& path);
GrayImage16 read_png_gray16(const std::string& path);
RgbImage8 read_png_rgb8(const std::string& path);

}  // namespace wsrd
