#pragma once

#include <cstdint>
#include <vector>

#include "wsrd/geometry/camera.hpp"
#include "wsrd/geometry/point_cloud.hpp"
#include "wsrd/image/image.hpp"

namespace wsrd {

/// Thresholds for the three-cue connectability criterion plus the voxel
/// grid and cluster filters.
struct ClusteringParams {
  double sigma_d = 0.02;         // meters
  double sigma_c = 8.0;          // intensity units, 0-255
  double sigma_s = 10.0;         // degrees
  double voxel_leaf = 0.01;      // meters
  int min_cluster_points = 30;
  double min_cluster_extent = 0.02;  // meters, bbox diagonal

  void validate() const;
};

struct PlaneRemovalParams {
  double inlier_threshold = 0.01;  // meters
  double min_plane_fraction = 0.2;
  int max_iterations = 500;
  int max_planes = 3;

  void validate() const;
};

/// One detected 3D cluster with its projected 2D footprint.
struct ObjectnessProposal {
  std::vector<std::size_t> point_indices;
  GrayImage8 mask;  // 0/255
  int u_min = 0, v_min = 0, u_max = 0, v_max = 0;
  Point3 centroid = Point3::Zero();
};

struct PlaneRemovalResult {
  PointCloud remaining;
  std::vector<std::size_t> remaining_indices;       // into the input cloud
  std::vector<std::vector<std::size_t>> plane_inliers;
};

/// Repeatedly fits the best RANSAC plane and strips its inliers while the
/// inlier fraction of the current cloud stays >= min_plane_fraction and
/// fewer than max_planes were removed. Deterministic given rng_seed.
PlaneRemovalResult remove_planes(const PointCloud& cloud,
                                 const PlaneRemovalParams& params,
                                 std::uint64_t rng_seed);

/// The boolean connectability criterion between two indexed points:
/// C_d AND (C_s OR C_c) with C_d: distance < sigma_d, C_c: intensity gap
/// < sigma_c, C_s: normal angle < sigma_s degrees. Requires normals and
/// intensities (Error("unprepared cloud")).
bool connectable(std::size_t p1, std::size_t p2, const PointCloud& cloud,
                 const ClusteringParams& params);

/// Grid neighborhood radius used when growing clusters over voxels:
/// Chebyshev distance <= ceil(sigma_d / voxel_leaf), so no sub-threshold
/// link can be missed.
int voxel_neighbor_radius(const ClusteringParams& params);

/// Voxelizes the cloud, region-grows over neighboring voxels using
/// connectable() on voxel representatives (centroid, renormalized mean
/// normal, mean intensity), in lexicographic (i,j,k) seed order, then drops
/// clusters failing the size/extent filters. Returns disjoint point-index
/// lists.
std::vector<std::vector<std::size_t>> cluster_proposals(
    const PointCloud& cloud, const ClusteringParams& params);

/// Rasterizes a cluster to the nearest-pixel binary mask with a tight bbox
/// and the 3D centroid. Points behind the camera or outside the image are
/// skipped; if none lands, throws Error("off-screen proposal").
ObjectnessProposal proposal_to_mask(const std::vector<std::size_t>& indices,
                                    const PointCloud& cloud,
                                    const CameraModel& camera);

}  // namespace wsrd
