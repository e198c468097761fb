#include "wsrd/geometry/point_cloud.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "wsrd/geometry/kdtree.hpp"

namespace wsrd {

void PointCloud::validate() const {
  const std::size_t n = points.size();
  if (!colors.empty() && colors.size() != n)
    throw DataError("color channel length mismatch");
  if (!intensities.empty() && intensities.size() != n)
    throw DataError("intensity channel length mismatch");
  if (!normals.empty() && normals.size() != n)
    throw DataError("normal channel length mismatch");
  for (const Point3& p : points)
    if (!p.allFinite()) throw DataError("non-finite point coordinates");
  for (const Point3& m : normals)
    if (std::abs(m.norm() - 1.0) > 1e-6) throw DataError("non-unit normal");
}

PointCloud PointCloud::with_intensity_from_color() const {
  if (!has_colors()) throw Error("unprepared cloud: no colors");
  PointCloud out = *this;
  out.intensities.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = colors[i];
    out.intensities[i] =
        std::round((double(c[0]) + double(c[1]) + double(c[2])) / 3.0);
  }
  return out;
}

void PointCloud::bounding_sphere(Point3& center, double& radius) const {
  if (empty()) throw Error("empty input");
  Point3 lo = points.front(), hi = points.front();
  for (const Point3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  center = 0.5 * (lo + hi);
  radius = 0.0;
  for (const Point3& p : points)
    radius = std::max(radius, (p - center).norm());
}

PointCloud transform_cloud(const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
                           const PointCloud& cloud) {
  const double ortho = (R * R.transpose() - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9 || std::abs(R.determinant() - 1.0) > 1e-9)
    throw Error("invalid rotation");
  PointCloud out = cloud;
  for (Point3& p : out.points) p = R * p + t;
  for (Point3& m : out.normals) m = R * m;
  return out;
}

PointCloud estimate_normals(const PointCloud& cloud, int k,
                            const Point3& viewpoint) {
  if (k < 3) throw Error("insufficient points: k must be >= 3");
  if (cloud.size() < static_cast<std::size_t>(k) + 1)
    throw Error("insufficient points");

  KdTree tree(cloud.points);
  PointCloud out = cloud;
  out.normals.resize(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nbrs = tree.knn(cloud.points[i], static_cast<std::size_t>(k));
    Point3 mean = Point3::Zero();
    for (std::size_t j : nbrs) mean += cloud.points[j];
    mean /= double(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t j : nbrs) {
      const Point3 d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    cov /= double(nbrs.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d evals = eig.eigenvalues();  // ascending
    // Rank-deficient neighborhood: the two smallest eigenvalues vanish
    // (collinear or coincident points leave the normal undefined).
    const double scale = std::max(evals[2], std::numeric_limits<double>::min());
    if (evals[1] / scale < 1e-12) throw Error("degenerate neighborhood");

    Point3 normal = eig.eigenvectors().col(0);
    if (normal.dot(viewpoint - cloud.points[i]) < 0.0) normal = -normal;
    out.normals[i] = normal.normalized();
  }
  return out;
}

}  // namespace wsrd
