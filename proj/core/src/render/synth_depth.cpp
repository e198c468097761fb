#include "wsrd/render/synth_depth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "wsrd/render/convex_hull.hpp"

namespace wsrd {

void RenderConfig::validate() const {
  if (sample_count < 0) throw Error("invalid sample_count");
  if (rolls.empty()) throw Error("no roll angles");
  if (yaw_step <= 0) throw Error("invalid yaw_step");
  if (image_size <= 0 || output_size <= 0) throw Error("invalid image size");
  if (focal <= 0) throw Error("invalid focal length");
  if (camera_distance_factor <= 0) throw Error("invalid distance factor");
  if (noise_sigma && *noise_sigma < 0) throw Error("invalid noise sigma");
}

PointCloud sample_surface(const TriangleMesh& mesh, int n, double noise_sigma,
                          std::uint64_t seed) {
  if (mesh.faces.empty()) throw Error("empty mesh");
  if (n < 0) throw Error("invalid sample count");

  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  if (total <= 0.0) throw Error("empty mesh");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PointCloud cloud;
  cloud.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double r = uni(rng) * total;
    const std::size_t f = std::size_t(
        std::lower_bound(cumulative.begin(), cumulative.end(), r) -
        cumulative.begin());
    const auto& [a, b, c] = mesh.faces[std::min(f, mesh.faces.size() - 1)];
    // Uniform barycentric coordinates via square-root warping.
    double s = uni(rng), t = uni(rng);
    const double sq = std::sqrt(s);
    Point3 p = (1.0 - sq) * mesh.vertices[a] +
               sq * (1.0 - t) * mesh.vertices[b] + sq * t * mesh.vertices[c];
    if (noise_sigma > 0.0)
      p += noise_sigma * Point3(gauss(rng), gauss(rng), gauss(rng));
    cloud.points.push_back(p);
  }
  return cloud;
}

std::vector<CameraModel> generate_poses(const RenderConfig& config,
                                        const Point3& center, double radius) {
  config.validate();
  if (radius <= 0.0) throw Error("invalid bounding radius");
  const double dist = config.camera_distance_factor * radius;
  const double deg = std::numbers::pi / 180.0;

  std::vector<CameraModel> poses;
  for (double roll : config.rolls) {
    for (double yaw = config.yaw_start; yaw < config.yaw_end - 1e-9;
         yaw += config.yaw_step) {
      // Z-Y-X extrinsic Euler angles applied to the camera axes
      // (x right, y down, z forward).
      const Eigen::Matrix3d euler =
          (Eigen::AngleAxisd(yaw * deg, Eigen::Vector3d::UnitZ()) *
           Eigen::AngleAxisd(config.pitch * deg, Eigen::Vector3d::UnitY()) *
           Eigen::AngleAxisd(roll * deg, Eigen::Vector3d::UnitX()))
              .toRotationMatrix();
      const Point3 forward = euler * Eigen::Vector3d::UnitZ();
      const Point3 campos = center - dist * forward;
      // Look-at the sphere center with the Euler down-vector as hint.
      const Point3 f = (center - campos).normalized();
      const Point3 down_hint = euler * Eigen::Vector3d::UnitY();
      const Point3 right = down_hint.cross(f).normalized();
      const Point3 down = f.cross(right);
      Eigen::Matrix3d R;
      R.row(0) = right;
      R.row(1) = down;
      R.row(2) = f;
      const Eigen::Vector3d t = -R * campos;
      poses.emplace_back(config.focal, config.focal, config.principal_u,
                         config.principal_v, R, t, config.image_size,
                         config.image_size);
    }
  }
  return poses;
}

std::vector<std::size_t> hidden_point_removal(const PointCloud& cloud,
                                              const Point3& viewpoint,
                                              double gamma) {
  if (cloud.empty()) throw Error("empty input");
  const std::size_t n = cloud.size();

  double max_range = 0.0;
  std::vector<Point3> flipped(n + 1);
  for (std::size_t i = 0; i < n; ++i)
    max_range = std::max(max_range, (cloud.points[i] - viewpoint).norm());
  if (max_range < 1e-12) throw Error("degenerate geometry");

  const double sphere_radius = std::pow(10.0, gamma) * max_range;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 p = cloud.points[i] - viewpoint;
    const double range = p.norm();
    flipped[i] = range < 1e-15
                     ? p
                     : p + 2.0 * (sphere_radius - range) * p / range;
  }
  flipped[n] = Point3::Zero();  // the viewpoint itself

  std::vector<std::size_t> visible;
  for (std::size_t idx : convex_hull_vertices(flipped))
    if (idx < n) visible.push_back(idx);
  std::sort(visible.begin(), visible.end());
  return visible;
}

DepthImage render_depth(const PointCloud& cloud, const CameraModel& camera) {
  std::vector<double> zbuf(std::size_t(camera.width()) * camera.height(),
                           std::numeric_limits<double>::infinity());
  for (const Point3& p : cloud.points) {
    PixelProjection px;
    try {
      px = project_point(camera, p);
    } catch (const Error&) {
      continue;
    }
    const int u = int(std::lround(px.u));
    const int v = int(std::lround(px.v));
    if (u < 0 || u >= camera.width() || v < 0 || v >= camera.height())
      continue;
    double& z = zbuf[std::size_t(v) * camera.width() + u];
    z = std::min(z, px.d);
  }

  DepthImage out{GrayImage16(camera.width(), camera.height(), 0), camera};
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (!std::isfinite(zbuf[i])) continue;
    const long mm = std::lround(zbuf[i] * 1000.0);
    out.depth.data[i] = std::uint16_t(std::clamp(mm, 1L, 65535L));
  }
  return out;
}

GrayImage16 resize_depth(const GrayImage16& in, int out_w, int out_h) {
  GrayImage16 out(out_w, out_h, 0);
  const double sx = double(in.width) / out_w;
  const double sy = double(in.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const double u = (x + 0.5) * sx - 0.5;
      const double v = (y + 0.5) * sy - 0.5;
      const int u0 = int(std::floor(u)), v0 = int(std::floor(v));
      const double fu = u - u0, fv = v - v0;
      double value = 0.0, weight = 0.0;
      for (int dv = 0; dv <= 1; ++dv)
        for (int du = 0; du <= 1; ++du) {
          const int px = u0 + du, py = v0 + dv;
          if (!in.contains(px, py)) continue;
          const std::uint16_t d = in.at(px, py);
          if (d == 0) continue;  // missing
          const double w = (du ? fu : 1.0 - fu) * (dv ? fv : 1.0 - fv);
          value += w * d;
          weight += w;
        }
      if (weight > 0.0)
        out.at(x, y) = std::uint16_t(std::clamp(
            std::lround(value / weight), 1L, 65535L));
    }
  }
  return out;
}

std::vector<DepthImage> render_views(const TriangleMesh& mesh,
                                     const RenderConfig& config,
                                     std::uint64_t seed, int jobs) {
  config.validate();
  Point3 center;
  double radius;
  mesh.bounding_sphere(center, radius);

  const double noise = config.resolved_noise_sigma(radius);
  const PointCloud cloud = sample_surface(mesh, config.sample_count, noise,
                                          seed);
  const auto poses = generate_poses(config, center, radius);
  const double scale = double(config.output_size) / config.image_size;

  std::vector<std::optional<DepthImage>> views(poses.size());
  auto render_one = [&](std::size_t v) {
    const auto visible =
        hidden_point_removal(cloud, poses[v].center(), config.hpr_gamma);
    PointCloud sub;
    sub.points.reserve(visible.size());
    for (std::size_t i : visible) sub.points.push_back(cloud.points[i]);
    DepthImage full = render_depth(sub, poses[v]);
    views[v] = DepthImage{
        resize_depth(full.depth, config.output_size, config.output_size),
        poses[v].scaled(scale)};
  };

  if (jobs <= 1) {
    for (std::size_t v = 0; v < poses.size(); ++v) render_one(v);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (std::size_t v = next++; v < poses.size(); v = next++)
          render_one(v);
      });
    for (auto& t : workers) t.join();
  }

  std::vector<DepthImage> out;
  out.reserve(views.size());
  for (auto& v : views) out.push_back(std::move(*v));
  return out;
}

}  // namespace wsrd
