#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wsrd/geometry/camera.hpp"
#include "wsrd/geometry/point_cloud.hpp"
#include "wsrd/image/image.hpp"
#include "wsrd/render/mesh.hpp"

namespace wsrd {

/// Virtual-camera rendering configuration. Defaults produce 30 hemisphere
/// poses (3 rolls x 10 yaws) and 500x500 depth maps resized to 224x224.
struct RenderConfig {
  int sample_count = 40000;
  std::optional<double> noise_sigma;  // meters; default 0.5% of radius
  std::vector<double> rolls = {270.0, 240.0, 210.0};  // degrees
  double pitch = 0.0;
  double yaw_start = 0.0, yaw_end = 360.0, yaw_step = 36.0;
  double camera_distance_factor = 2.5;  // x bounding-sphere radius
  int image_size = 500;
  double focal = 500.0;
  double principal_u = 250.0, principal_v = 250.0;
  int output_size = 224;
  double hpr_gamma = 3.0;

  void validate() const;
  double resolved_noise_sigma(double bounding_radius) const {
    return noise_sigma.value_or(0.005 * bounding_radius);
  }
};

/// Dense range image; depth in millimeters, 16-bit, 0 = no return.
struct DepthImage {
  GrayImage16 depth;
  CameraModel camera;
};

/// Draws n points with per-face probability proportional to area, uniform
/// barycentric placement, plus isotropic Gaussian noise of std noise_sigma
/// per coordinate. Deterministic given seed.
PointCloud sample_surface(const TriangleMesh& mesh, int n, double noise_sigma,
                          std::uint64_t seed);

/// One camera per (roll, yaw) pair on a hemisphere of radius
/// camera_distance_factor * radius around `center`, each looking at the
/// center. The roll angle fixes the elevation ring and the in-plane
/// orientation (Z-Y-X extrinsic Euler reading with look-at correction).
std::vector<CameraModel> generate_poses(const RenderConfig& config,
                                        const Point3& center, double radius);

/// Spherical-flip visibility: translate to the viewpoint, flip each point
/// p -> p + 2(R_s - |p|) p/|p| with R_s = 10^gamma * max|p|, and keep the
/// convex-hull members of the flipped set plus the origin. Returns visible
/// indices, sorted.
std::vector<std::size_t> hidden_point_removal(const PointCloud& cloud,
                                              const Point3& viewpoint,
                                              double gamma);

/// Nearest-pixel z-buffer rasterization of the cloud (world frame);
/// untouched pixels are 0.
DepthImage render_depth(const PointCloud& cloud, const CameraModel& camera);

/// Bilinear resize that treats 0 as missing: zero pixels do not contribute
/// and an output pixel is 0 only when every contributor is 0.
GrayImage16 resize_depth(const GrayImage16& in, int out_w, int out_h);

/// Full per-mesh pipeline: sample -> poses -> HPR per view -> depth raster
/// -> resize to output_size. Deterministic given (mesh, config, seed).
std::vector<DepthImage> render_views(const TriangleMesh& mesh,
                                     const RenderConfig& config,
                                     std::uint64_t seed, int jobs = 1);

}  // namespace wsrd
