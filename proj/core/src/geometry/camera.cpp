#include "wsrd/geometry/camera.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <iomanip>

namespace wsrd {

void require_rotation(const Eigen::Matrix3d& R, double tol) {
  const double ortho = (R * R.transpose() - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > tol || std::abs(R.determinant() - 1.0) > tol)
    throw Error("invalid rotation");
}

CameraModel::CameraModel(double fx, double fy, double cx, double cy,
                         const Eigen::Matrix3d& R, const Eigen::Vector3d& t,
                         int width, int height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), R_(R), t_(t), width_(width),
      height_(height) {
  if (fx_ <= 0.0 || fy_ <= 0.0) throw Error("invalid intrinsics");
  if (width_ <= 0 || height_ <= 0) throw Error("invalid image size");
  require_rotation(R_);
}

Eigen::Matrix3d CameraModel::intrinsic_matrix() const {
  Eigen::Matrix3d C = Eigen::Matrix3d::Identity();
  C(0, 0) = fx_;
  C(1, 1) = fy_;
  C(0, 2) = cx_;
  C(1, 2) = cy_;
  return C;
}

CameraModel CameraModel::scaled(double factor) const {
  return CameraModel(fx_ * factor, fy_ * factor, cx_ * factor, cy_ * factor,
                     R_, t_, int(std::lround(width_ * factor)),
                     int(std::lround(height_ * factor)));
}

CameraModel CameraModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open camera config: " + path);
  double v[23];
  for (double& x : v)
    if (!(in >> x)) throw DataError("truncated camera config: " + path);
  Eigen::Matrix3d C;
  C << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  R << v[9], v[10], v[11], v[13], v[14], v[15], v[17], v[18], v[19];
  t << v[12], v[16], v[20];
  return CameraModel(C(0, 0), C(1, 1), C(0, 2), C(1, 2), R, t,
                     int(std::lround(v[21])), int(std::lround(v[22])));
}

void CameraModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write camera config: " + path);
  out << std::setprecision(17);
  const Eigen::Matrix3d C = intrinsic_matrix();
  for (int r = 0; r < 3; ++r)
    out << C(r, 0) << ' ' << C(r, 1) << ' ' << C(r, 2) << '\n';
  for (int r = 0; r < 3; ++r)
    out << R_(r, 0) << ' ' << R_(r, 1) << ' ' << R_(r, 2) << ' ' << t_[r]
        << '\n';
  out << width_ << ' ' << height_ << '\n';
}

PixelProjection project_point(const CameraModel& camera, const Point3& p) {
  const Point3 pc = camera.world_to_camera(p);
  if (pc.z() <= 1e-9) throw Error("behind camera");
  PixelProjection out;
  out.d = pc.z();
  out.u = camera.cx() + camera.fx() * pc.x() / pc.z();
  out.v = camera.cy() + camera.fy() * pc.y() / pc.z();
  return out;
}

Point3 unproject_pixel(const CameraModel& camera, double u, double v,
                       double d) {
  const Point3 pc(d * (u - camera.cx()) / camera.fx(),
                  d * (v - camera.cy()) / camera.fy(), d);
  return camera.rotation().transpose() * (pc - camera.translation());
}

}  // namespace wsrd
