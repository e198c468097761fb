#include "fixtures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "json.hpp"
#include "wsrd/image/png_io.hpp"
#include "wsrd/io/ply_io.hpp"

namespace wsrd::testing {

namespace {
void push_face(TriangleMesh& mesh, int a, int b, int c) {
  mesh.faces.push_back({std::uint32_t(a), std::uint32_t(b), std::uint32_t(c)});
}
}  // namespace

TriangleMesh make_sphere_mesh(const Point3& center, double radius, int rings,
                              int segments) {
  TriangleMesh mesh;
  const double pi = std::numbers::pi;
  mesh.vertices.push_back(center + Point3(0, 0, radius));   // north pole
  for (int r = 1; r < rings; ++r) {
    const double phi = pi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2 * pi * s / segments;
      mesh.vertices.push_back(
          center + radius * Point3(std::sin(phi) * std::cos(theta),
                                   std::sin(phi) * std::sin(theta),
                                   std::cos(phi)));
    }
  }
  mesh.vertices.push_back(center + Point3(0, 0, -radius));  // south pole
  const auto ring_vertex = [&](int r, int s) {
    return 1 + (r - 1) * segments + (s % segments);
  };
  for (int s = 0; s < segments; ++s)
    push_face(mesh, 0, ring_vertex(1, s), ring_vertex(1, s + 1));
  for (int r = 1; r < rings - 1; ++r)
    for (int s = 0; s < segments; ++s) {
      const int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      const int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      push_face(mesh, a, c, d);
      push_face(mesh, a, d, b);
    }
  const int south = int(mesh.vertices.size()) - 1;
  for (int s = 0; s < segments; ++s)
    push_face(mesh, south, ring_vertex(rings - 1, s + 1),
              ring_vertex(rings - 1, s));
  return mesh;
}

TriangleMesh make_box_mesh(const Point3& lo, const Point3& hi) {
  TriangleMesh mesh;
  for (int i = 0; i < 8; ++i)
    mesh.vertices.push_back(Point3(i & 1 ? hi.x() : lo.x(),
                                   i & 2 ? hi.y() : lo.y(),
                                   i & 4 ? hi.z() : lo.z()));
  static constexpr std::array<std::array<int, 4>, 6> quads = {{
      {0, 2, 3, 1},  // z = lo (normal -z)
      {4, 5, 7, 6},  // z = hi
      {0, 1, 5, 4},  // y = lo
      {2, 6, 7, 3},  // y = hi
      {0, 4, 6, 2},  // x = lo
      {1, 3, 7, 5},  // x = hi
  }};
  for (const auto& q : quads) {
    push_face(mesh, q[0], q[1], q[2]);
    push_face(mesh, q[0], q[2], q[3]);
  }
  return mesh;
}

SyntheticScene make_scene(std::uint64_t seed, int object_count,
                          double point_spacing) {
  SyntheticScene scene;
  scene.object_count = object_count;
  std::mt19937_64 rng(seed);

  const Point3 eye(0, 0, 1.2);
  PointCloud& cloud = scene.cloud;

  const auto push = [&](const Point3& p, Point3 normal, std::uint8_t gray,
                        int label) {
    if (normal.dot(eye - p) < 0) normal = -normal;
    cloud.points.push_back(p);
    cloud.normals.push_back(normal);
    cloud.colors.push_back({gray, gray, gray});
    scene.labels.push_back(label);
  };

  // Table plane z = 0, 0.8 m square, light gray.
  const int grid = int(std::lround(0.8 / point_spacing));
  for (int iy = 0; iy <= grid; ++iy)
    for (int ix = 0; ix <= grid; ++ix)
      push(Point3(-0.4 + ix * point_spacing, -0.4 + iy * point_spacing, 0),
           Point3(0, 0, 1), 200, -1);

  // Six well-separated slots; balls get strongly distinct gray levels.
  std::vector<Point3> slots;
  for (double x : {-0.26, 0.0, 0.26})
    for (double y : {-0.15, 0.15}) slots.push_back(Point3(x, y, 0));
  std::shuffle(slots.begin(), slots.end(), rng);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  std::uniform_real_distribution<double> radius_dist(0.035, 0.05);

  const double pi = std::numbers::pi;
  for (int obj = 0; obj < object_count; ++obj) {
    const double radius = radius_dist(rng);
    const Point3 center = slots[std::size_t(obj)] +
                          Point3(jitter(rng), jitter(rng), radius);
    const auto gray = std::uint8_t(20 + 28 * obj);
    const int rings = std::max(6, int(std::lround(pi * radius / point_spacing)));
    for (int r = 0; r <= rings; ++r) {
      const double phi = pi * r / rings;
      const int segs =
          std::max(3, int(std::lround(2 * pi * radius * std::sin(phi) /
                                      point_spacing)));
      for (int s = 0; s < segs; ++s) {
        const double theta = 2 * pi * s / segs;
        const Point3 n(std::sin(phi) * std::cos(theta),
                       std::sin(phi) * std::sin(theta), std::cos(phi));
        push(center + radius * n, n, gray, obj);
      }
    }
  }

  cloud = cloud.with_intensity_from_color();

  // Straight-down view; rows are camera right, down, forward.
  Eigen::Matrix3d R;
  R << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  scene.camera = CameraModel(500, 500, 250, 250, R, -R * eye, 500, 500);
  return scene;
}

PipelineFixture write_pipeline_fixture(const std::string& root,
                                       const std::vector<std::uint64_t>& seeds,
                                       int objects_per_frame) {
  namespace fs = std::filesystem;
  PipelineFixture fx;
  fx.frames_dir = (fs::path(root) / "frames").string();
  fx.camera_path = (fs::path(root) / "camera.txt").string();
  fx.gt_dir = (fs::path(root) / "gt").string();
  fs::create_directories(fx.frames_dir);
  fs::create_directories(fx.gt_dir);

  for (std::size_t f = 0; f < seeds.size(); ++f) {
    const SyntheticScene scene = make_scene(seeds[f], objects_per_frame);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03zu", f);
    write_ply((fs::path(fx.frames_dir) / (std::string(name) + ".ply")).string(),
              scene.cloud);
    if (f == 0) scene.camera.save(fx.camera_path);

    const fs::path frame_gt = fs::path(fx.gt_dir) / name;
    fs::create_directories(frame_gt);
    nlohmann::json index = nlohmann::json::array();
    for (int obj = 0; obj < objects_per_frame; ++obj) {
      std::vector<std::size_t> indices;
      for (std::size_t i = 0; i < scene.cloud.size(); ++i)
        if (scene.labels[i] == obj) indices.push_back(i);
      const ObjectnessProposal gt =
          proposal_to_mask(indices, scene.cloud, scene.camera);
      const std::string mask_name = "mask_" + std::to_string(obj) + ".png";
      write_png((frame_gt / mask_name).string(), gt.mask);
      index.push_back({{"file", mask_name}, {"category", obj % 2}});
    }
    std::ofstream out(frame_gt / "index.json");
    out << index.dump(2) << '\n';
  }
  return fx;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t(0));
  }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<std::vector<std::size_t>> brute_force_clusters(
    const PointCloud& cloud, const ClusteringParams& params) {
  // Same voxelization contract as the library, but all-pairs union-find
  // instead of grid-bounded region growing.
  std::map<std::array<long, 3>, std::vector<std::size_t>> voxels;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::array<long, 3> key = {
        long(std::floor(cloud.points[i].x() / params.voxel_leaf)),
        long(std::floor(cloud.points[i].y() / params.voxel_leaf)),
        long(std::floor(cloud.points[i].z() / params.voxel_leaf))};
    voxels[key].push_back(i);
  }

  PointCloud reps;
  std::vector<std::vector<std::size_t>> members;
  for (const auto& [key, indices] : voxels) {
    Point3 centroid = Point3::Zero(), normal = Point3::Zero();
    double intensity = 0;
    for (std::size_t i : indices) {
      centroid += cloud.points[i];
      normal += cloud.normals[i];
      intensity += cloud.intensities[i];
    }
    reps.points.push_back(centroid / double(indices.size()));
    const double norm = normal.norm();
    reps.normals.push_back(norm > 0 ? Point3(normal / norm)
                                    : Point3(0, 0, 1));
    reps.intensities.push_back(intensity / double(indices.size()));
    members.push_back(indices);
  }

  UnionFind uf(reps.size());
  for (std::size_t a = 0; a < reps.size(); ++a)
    for (std::size_t b = a + 1; b < reps.size(); ++b)
      if (connectable(a, b, reps, params)) uf.unite(a, b);

  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t v = 0; v < reps.size(); ++v)
    for (std::size_t i : members[v]) by_root[uf.find(v)].push_back(i);

  std::vector<std::vector<std::size_t>> clusters;
  for (auto& [root, indices] : by_root) {
    if (indices.size() < std::size_t(params.min_cluster_points)) continue;
    Point3 lo = cloud.points[indices[0]], hi = lo;
    for (std::size_t i : indices) {
      lo = lo.cwiseMin(cloud.points[i]);
      hi = hi.cwiseMax(cloud.points[i]);
    }
    if ((hi - lo).norm() < params.min_cluster_extent) continue;
    std::sort(indices.begin(), indices.end());
    clusters.push_back(std::move(indices));
  }
  std::sort(clusters.begin(), clusters.end());
  return clusters;
}

std::vector<bool> ray_visibility(const std::vector<Point3>& points,
                                 const TriangleMesh& mesh, const Point3& eye,
                                 double eps) {
  std::vector<bool> visible(points.size(), true);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point3 dir = points[p] - eye;
    const double t_point = dir.norm();
    const Point3 d = dir / t_point;
    for (const auto& face : mesh.faces) {
      const Point3& v0 = mesh.vertices[std::size_t(face[0])];
      const Point3 e1 = mesh.vertices[std::size_t(face[1])] - v0;
      const Point3 e2 = mesh.vertices[std::size_t(face[2])] - v0;
      const Point3 pvec = d.cross(e2);
      const double det = e1.dot(pvec);
      if (std::abs(det) < 1e-14) continue;
      const Point3 tvec = eye - v0;
      const double u = tvec.dot(pvec) / det;
      if (u < 0 || u > 1) continue;
      const Point3 qvec = tvec.cross(e1);
      const double v = d.dot(qvec) / det;
      if (v < 0 || u + v > 1) continue;
      const double t = e2.dot(qvec) / det;
      if (t > eps && t < t_point * (1.0 - 1e-9) - eps) {
        visible[p] = false;
        break;
      }
    }
  }
  return visible;
}

McGpcOracle mc_gpc_oracle(const TrainingSet& ts,
                          const Eigen::MatrixXd& queries,
                          const KernelHyperparams& h, std::size_t samples,
                          std::uint64_t seed) {
  const Eigen::Index n = ts.size();
  const Eigen::Index m = queries.rows();
  Eigen::MatrixXd K = kernel_matrix(h, ts.X, ts.split);
  K.diagonal().array() += 1e-10 * K.diagonal().mean();
  const Eigen::LLT<Eigen::MatrixXd> llt(K);
  const Eigen::MatrixXd L = llt.matrixL();

  // Noise-free regression of each query latent on the training latents.
  Eigen::MatrixXd Kq(n, m);
  Eigen::VectorXd v(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i)
      Kq(i, j) = kernel_eval(h, ts.X.row(i), queries.row(j), ts.split);
    const Eigen::VectorXd a = llt.solve(Kq.col(j));
    v[j] = kernel_eval(h, queries.row(j), queries.row(j), ts.split) -
           Kq.col(j).dot(a);
    v[j] = std::max(v[j], 0.0);
  }
  const Eigen::MatrixXd Alpha = llt.solve(Kq);  // n x m

  // Local probit log-CDF so the oracle shares no numerics with the library.
  const auto log_phi = [](double x) {
    return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
  };
  const auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> logw(samples);
  Eigen::MatrixXd means(m, samples);
  Eigen::VectorXd z(n), f(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) z[i] = gauss(rng);
    f = L * z;
    double lw = 0;
    for (Eigen::Index i = 0; i < n; ++i) lw += log_phi(ts.y[i] * f[i]);
    logw[s] = lw;
    means.col(Eigen::Index(s)) = Alpha.transpose() * f;
  }

  const double max_lw = *std::max_element(logw.begin(), logw.end());
  double denom = 0;
  Eigen::VectorXd numer = Eigen::VectorXd::Zero(m);
  for (std::size_t s = 0; s < samples; ++s) {
    const double w = std::exp(logw[s] - max_lw);
    denom += w;
    for (Eigen::Index j = 0; j < m; ++j)
      numer[j] += w * phi(means(j, Eigen::Index(s)) / std::sqrt(1.0 + v[j]));
  }

  McGpcOracle oracle;
  oracle.log_ml = max_lw + std::log(denom / double(samples));
  for (Eigen::Index j = 0; j < m; ++j)
    oracle.probabilities.push_back(numer[j] / denom);
  return oracle;
}

TrainingSet random_training_set(int n, int d_rgb, int d_depth,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.4);
  TrainingSet ts;
  ts.split = d_rgb;
  ts.X.resize(n, d_rgb + d_depth);
  ts.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ts.y[i] = i % 2 == 0 ? 1 : -1;
    for (int j = 0; j < d_rgb + d_depth; ++j)
      ts.X(i, j) = 0.6 * ts.y[i] + gauss(rng);
  }
  return ts;
}

}  // namespace wsrd::testing
