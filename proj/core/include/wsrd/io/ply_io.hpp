#pragma once

#include <string>

#include "wsrd/geometry/point_cloud.hpp"

namespace wsrd {

/// Reads an ASCII or binary-little-endian PLY vertex cloud. Properties
/// x,y,z are required; red,green,blue and nx,ny,nz are picked up when
/// present; anything else is skipped. Throws DataError on malformed input.
PointCloud read_ply(const std::string& path);

/// Writes an ASCII PLY with whatever channels the cloud carries.
void write_ply(const std::string& path, const PointCloud& cloud);

}  // namespace wsrd
