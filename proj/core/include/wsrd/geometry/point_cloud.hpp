#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "wsrd/error.hpp"

namespace wsrd {

using Point3 = Eigen::Vector3d;

/// Per-point RGB color, 0-255 per channel.
using Color = std::array<std::uint8_t, 3>;

/// Point cloud with optional per-point color, intensity and unit normal
/// channels. Channels, when present, are parallel to `points`. Operations
/// treat clouds as immutable values and return new clouds.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<Color> colors;        // empty or size() == points.size()
  std::vector<double> intensities;  // 0-255 scalars
  std::vector<Point3> normals;      // unit vectors

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_intensities() const { return !intensities.empty(); }
  bool has_normals() const { return !normals.empty(); }

  /// Checks parallel-array lengths and normal unit norms (1e-6).
  void validate() const;

  /// Returns a copy with the intensity channel filled from colors,
  /// I = round((R+G+B)/3). Requires colors.
  PointCloud with_intensity_from_color() const;

  /// Smallest sphere center/radius bound (center = bbox center).
  void bounding_sphere(Point3& center, double& radius) const;
};

/// Rigidly maps points p -> R*p + t; normals by R only; color and intensity
/// channels are preserved. Throws Error("invalid rotation") if R is not a
/// proper rotation (orthonormal, det +1, within 1e-9).
PointCloud transform_cloud(const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
                           const PointCloud& cloud);

/// Estimates a unit normal per point from PCA over the k nearest neighbors,
/// sign-flipped to face `viewpoint`. Throws Error("insufficient points") if
/// the cloud has fewer than k+1 points and Error("degenerate neighborhood")
/// when a neighborhood is rank deficient (collinear points).
PointCloud estimate_normals(const PointCloud& cloud, int k,
                            const Point3& viewpoint);

}  // namespace wsrd
