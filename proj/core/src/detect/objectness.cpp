#include "wsrd/detect/objectness.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

namespace wsrd {

void ClusteringParams::validate() const {
  if (sigma_d <= 0 || sigma_c <= 0 || sigma_s <= 0 || voxel_leaf <= 0 ||
      min_cluster_points <= 0 || min_cluster_extent <= 0)
    throw Error("invalid clustering params");
}

void PlaneRemovalParams::validate() const {
  if (inlier_threshold <= 0 || min_plane_fraction <= 0 ||
      min_plane_fraction > 1 || max_iterations <= 0 || max_planes < 0)
    throw Error("invalid plane removal params");
}

PlaneRemovalResult remove_planes(const PointCloud& cloud,
                                 const PlaneRemovalParams& params,
                                 std::uint64_t rng_seed) {
  params.validate();
  if (cloud.empty()) throw Error("empty input");
  std::mt19937_64 rng(rng_seed);

  PlaneRemovalResult result;
  result.remaining_indices.resize(cloud.size());
  std::iota(result.remaining_indices.begin(), result.remaining_indices.end(),
            std::size_t{0});

  for (int round = 0; round < params.max_planes; ++round) {
    const auto& active = result.remaining_indices;
    if (active.size() < 3) break;
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);

    std::size_t best_count = 0;
    Point3 best_n = Point3::UnitZ();
    double best_d = 0.0;
    for (int it = 0; it < params.max_iterations; ++it) {
      const Point3& a = cloud.points[active[pick(rng)]];
      const Point3& b = cloud.points[active[pick(rng)]];
      const Point3& c = cloud.points[active[pick(rng)]];
      Point3 n = (b - a).cross(c - a);
      const double norm = n.norm();
      if (norm < 1e-12) continue;
      n /= norm;
      const double d = -n.dot(a);
      std::size_t count = 0;
      for (std::size_t idx : active)
        if (std::abs(n.dot(cloud.points[idx]) + d) < params.inlier_threshold)
          ++count;
      if (count > best_count) {
        best_count = count;
        best_n = n;
        best_d = d;
      }
    }

    // Fraction of the *original* cloud: small residual structures left
    // after a dominant plane never qualify as further planes.
    const double fraction = double(best_count) / double(cloud.size());
    if (fraction < params.min_plane_fraction) break;

    std::vector<std::size_t> inliers, survivors;
    for (std::size_t idx : active) {
      if (std::abs(best_n.dot(cloud.points[idx]) + best_d) <
          params.inlier_threshold)
        inliers.push_back(idx);
      else
        survivors.push_back(idx);
    }
    result.plane_inliers.push_back(std::move(inliers));
    result.remaining_indices = std::move(survivors);
  }

  PointCloud& rem = result.remaining;
  rem.points.reserve(result.remaining_indices.size());
  for (std::size_t idx : result.remaining_indices) {
    rem.points.push_back(cloud.points[idx]);
    if (cloud.has_colors()) rem.colors.push_back(cloud.colors[idx]);
    if (cloud.has_intensities())
      rem.intensities.push_back(cloud.intensities[idx]);
    if (cloud.has_normals()) rem.normals.push_back(cloud.normals[idx]);
  }
  return result;
}

bool connectable(std::size_t p1, std::size_t p2, const PointCloud& cloud,
                 const ClusteringParams& params) {
  if (!cloud.has_normals() || !cloud.has_intensities())
    throw Error("unprepared cloud");
  const double dist = (cloud.points[p1] - cloud.points[p2]).norm();
  if (dist >= params.sigma_d) return false;
  if (std::abs(cloud.intensities[p1] - cloud.intensities[p2]) < params.sigma_c)
    return true;
  const double cosang =
      std::clamp(cloud.normals[p1].dot(cloud.normals[p2]) /
                     (cloud.normals[p1].norm() * cloud.normals[p2].norm()),
                 -1.0, 1.0);
  const double angle_deg = std::acos(cosang) * 180.0 / std::numbers::pi;
  return angle_deg < params.sigma_s;
}

int voxel_neighbor_radius(const ClusteringParams& params) {
  return int(std::ceil(params.sigma_d / params.voxel_leaf));
}

namespace {

using VoxelKey = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

VoxelKey voxel_of(const Point3& p, double leaf) {
  return {std::int64_t(std::floor(p.x() / leaf)),
          std::int64_t(std::floor(p.y() / leaf)),
          std::int64_t(std::floor(p.z() / leaf))};
}

}  // namespace

std::vector<std::vector<std::size_t>> cluster_proposals(
    const PointCloud& cloud, const ClusteringParams& params) {
  params.validate();
  if (cloud.empty()) return {};
  if (!cloud.has_normals() || !cloud.has_intensities())
    throw Error("unprepared cloud");

  // Voxelize; std::map keeps keys in lexicographic (i,j,k) order, which
  // fixes the deterministic seed order of the region growth.
  std::map<VoxelKey, std::vector<std::size_t>> voxels;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    voxels[voxel_of(cloud.points[i], params.voxel_leaf)].push_back(i);

  // Voxel representatives as a small cloud so connectable() applies as-is.
  PointCloud reps;
  std::vector<VoxelKey> keys;
  std::map<VoxelKey, std::size_t> key_to_rep;
  reps.points.reserve(voxels.size());
  for (const auto& [key, members] : voxels) {
    Point3 centroid = Point3::Zero(), normal = Point3::Zero();
    double intensity = 0.0;
    for (std::size_t i : members) {
      centroid += cloud.points[i];
      normal += cloud.normals[i];
      intensity += cloud.intensities[i];
    }
    centroid /= double(members.size());
    intensity /= double(members.size());
    if (normal.norm() < 1e-12)
      normal = cloud.normals[members.front()];  // cancelling normals
    key_to_rep[key] = reps.points.size();
    keys.push_back(key);
    reps.points.push_back(centroid);
    reps.normals.push_back(normal.normalized());
    reps.intensities.push_back(intensity);
  }

  const int r = voxel_neighbor_radius(params);
  std::vector<int> label(reps.size(), -1);
  int n_clusters = 0;
  for (std::size_t seed = 0; seed < reps.size(); ++seed) {
    if (label[seed] >= 0) continue;
    const int cluster = n_clusters++;
    std::vector<std::size_t> frontier{seed};
    label[seed] = cluster;
    while (!frontier.empty()) {
      const std::size_t cur = frontier.back();
      frontier.pop_back();
      const auto [ci, cj, ck] = keys[cur];
      for (std::int64_t di = -r; di <= r; ++di)
        for (std::int64_t dj = -r; dj <= r; ++dj)
          for (std::int64_t dk = -r; dk <= r; ++dk) {
            if (di == 0 && dj == 0 && dk == 0) continue;
            auto it = key_to_rep.find({ci + di, cj + dj, ck + dk});
            if (it == key_to_rep.end()) continue;
            const std::size_t nb = it->second;
            if (label[nb] >= 0) continue;
            if (connectable(cur, nb, reps, params)) {
              label[nb] = cluster;
              frontier.push_back(nb);
            }
          }
    }
  }

  std::vector<std::vector<std::size_t>> clusters(n_clusters);
  for (std::size_t v = 0; v < reps.size(); ++v) {
    const auto& members = voxels[keys[v]];
    auto& c = clusters[label[v]];
    c.insert(c.end(), members.begin(), members.end());
  }

  std::vector<std::vector<std::size_t>> kept;
  for (auto& c : clusters) {
    if (int(c.size()) < params.min_cluster_points) continue;
    Point3 lo = cloud.points[c.front()], hi = lo;
    for (std::size_t i : c) {
      lo = lo.cwiseMin(cloud.points[i]);
      hi = hi.cwiseMax(cloud.points[i]);
    }
    if ((hi - lo).norm() < params.min_cluster_extent) continue;
    std::sort(c.begin(), c.end());
    kept.push_back(std::move(c));
  }
  return kept;
}

ObjectnessProposal proposal_to_mask(const std::vector<std::size_t>& indices,
                                    const PointCloud& cloud,
                                    const CameraModel& camera) {
  if (indices.empty()) throw Error("empty input");
  ObjectnessProposal prop;
  prop.point_indices = indices;
  prop.mask = GrayImage8(camera.width(), camera.height(), 0);
  prop.u_min = camera.width();
  prop.v_min = camera.height();
  prop.u_max = -1;
  prop.v_max = -1;

  Point3 centroid = Point3::Zero();
  std::size_t landed = 0;
  for (std::size_t idx : indices) {
    centroid += cloud.points[idx];
    PixelProjection px;
    try {
      px = project_point(camera, cloud.points[idx]);
    } catch (const Error&) {
      continue;  // behind camera
    }
    const int u = int(std::lround(px.u));
    const int v = int(std::lround(px.v));
    if (!prop.mask.contains(u, v)) continue;
    prop.mask.at(u, v) = 255;
    prop.u_min = std::min(prop.u_min, u);
    prop.v_min = std::min(prop.v_min, v);
    prop.u_max = std::max(prop.u_max, u);
    prop.v_max = std::max(prop.v_max, v);
    ++landed;
  }
  if (landed == 0) throw Error("off-screen proposal");
  prop.centroid = centroid / double(indices.size());
  return prop;
}

}  // namespace wsrd
