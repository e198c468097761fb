#pragma once

#include <array>
#include <string>
#include <vector>

#include "wsrd/geometry/point_cloud.hpp"

namespace wsrd {

/// Indexed triangle mesh. Faces reference valid vertices; zero-area faces
/// are dropped at load time.
struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  double face_area(std::size_t f) const;
  void bounding_sphere(Point3& center, double& radius) const;
};

/// Reads an OFF mesh (ModelNet convention; tolerates counts glued to the
/// "OFF" keyword). Polygonal faces are fan-triangulated; degenerate faces
/// are discarded. Throws DataError on malformed input.
TriangleMesh read_off(const std::string& path);

void write_off(const std::string& path, const TriangleMesh& mesh);

}  // namespace wsrd
