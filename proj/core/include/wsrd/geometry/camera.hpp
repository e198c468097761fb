#pragma once

#include <Eigen/Core>
#include <string>

#include "wsrd/geometry/point_cloud.hpp"

namespace wsrd {

/// Continuous-coordinate projection of a 3D point. d is the depth along the
/// optical axis in meters (d > 0 for valid projections).
struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
};

/// Pinhole camera: intrinsics (fx, fy, cx, cy) plus a world-to-camera rigid
/// transform x_cam = R * x_world + t. Camera frame: x right, y down,
/// z forward.
class CameraModel {
 public:
  CameraModel(double fx, double fy, double cx, double cy,
              const Eigen::Matrix3d& R, const Eigen::Vector3d& t, int width,
              int height);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  const Eigen::Matrix3d& rotation() const { return R_; }
  const Eigen::Vector3d& translation() const { return t_; }
  int width() const { return width_; }
  int height() const { return height_; }

  /// 3x3 intrinsic matrix on the standard pinhole layout.
  Eigen::Matrix3d intrinsic_matrix() const;

  /// Camera center in world coordinates, -R^T * t.
  Point3 center() const { return -R_.transpose() * t_; }

  Point3 world_to_camera(const Point3& p) const { return R_ * p + t_; }

  /// Returns a camera with intrinsics and image size scaled by `factor`
  /// (same pose); used when resizing rendered images.
  CameraModel scaled(double factor) const;

  /// Reads the plain-text camera config: 9 intrinsic values (row-major C),
  /// 12 extrinsic values (row-major [R|t]), width, height.
  static CameraModel load(const std::string& path);
  void save(const std::string& path) const;

 private:
  double fx_, fy_, cx_, cy_;
  Eigen::Matrix3d R_;
  Eigen::Vector3d t_;
  int width_, height_;
};

/// Back-projects a world point to continuous pixel coordinates and depth,
/// satisfying d*[u,v,1]^T = C*[R|t]*[x,y,z,1]^T. Throws
/// Error("behind camera") when the transformed depth is <= 1e-9.
PixelProjection project_point(const CameraModel& camera, const Point3& p);

/// Inverse of project_point given a known depth d.
Point3 unproject_pixel(const CameraModel& camera, double u, double v, double d);

/// Throws Error("invalid rotation") unless R is orthonormal with det +1
/// (tolerance 1e-9).
void require_rotation(const Eigen::Matrix3d& R, double tol = 1e-9);

}  // namespace wsrd
