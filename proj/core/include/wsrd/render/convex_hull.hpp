#pragma once

#include <vector>

#include "wsrd/geometry/point_cloud.hpp"

namespace wsrd {

/// Indices of the points on the convex hull of `points` (hull vertices,
/// unsorted). Degenerate inputs (fewer than 4 points, or all points
/// coplanar/collinear within tolerance) return every index. Quickhull with
/// per-face conflict lists.
std::vector<std::size_t> convex_hull_vertices(const std::vector<Point3>& points);

}  // namespace wsrd
