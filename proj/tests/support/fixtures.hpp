// Shared test fixtures and independent oracles: analytic meshes, synthetic
// labeled scenes, brute-force reference implementations used to validate
// the library against ground truth it does not share code with.
#pragma once

#include <cstdint>
#include <vector>

#include "wsrd/detect/objectness.hpp"
#include "wsrd/geometry/camera.hpp"
#include "wsrd/geometry/point_cloud.hpp"
#include "wsrd/gpc/gpc.hpp"
#include "wsrd/render/mesh.hpp"

namespace wsrd::testing {

// UV sphere centered at `center`; rings x segments quads, fan caps.
TriangleMesh make_sphere_mesh(const Point3& center, double radius,
                              int rings = 24, int segments = 48);

// Axis-aligned box triangulated into 12 faces.
TriangleMesh make_box_mesh(const Point3& min_corner, const Point3& max_corner);

/// Synthetic tabletop: a dense colored plane patch plus `object_count`
/// well-separated colored balls resting on it. Labels: -1 for plane points,
/// object index otherwise.
struct SyntheticScene {
  PointCloud cloud;
  std::vector<int> labels;
  CameraModel camera{500, 500, 250, 250, Eigen::Matrix3d::Identity(),
                     Eigen::Vector3d::Zero(), 500, 500};
  int object_count = 0;
};
SyntheticScene make_scene(std::uint64_t seed, int object_count,
                          double point_spacing = 0.005);

/// On-disk dataset for pipeline-level tests: PLY frames, a camera config
/// and per-frame ground-truth masks (object categories alternate 0/1).
struct PipelineFixture {
  std::string frames_dir;
  std::string camera_path;
  std::string gt_dir;
};
PipelineFixture write_pipeline_fixture(const std::string& root,
                                       const std::vector<std::uint64_t>& seeds,
                                       int objects_per_frame);

/// All-pairs connectability components over voxel representatives plus the
/// same size/extent filters; independent of the grid-adjacency region
/// growing in the library.
std::vector<std::vector<std::size_t>> brute_force_clusters(
    const PointCloud& cloud, const ClusteringParams& params);

/// Möller-Trumbore visibility: a point is visible from `eye` when no mesh
/// triangle blocks the segment eye->point (with slack `eps`).
std::vector<bool> ray_visibility(const std::vector<Point3>& points,
                                 const TriangleMesh& mesh, const Point3& eye,
                                 double eps = 1e-6);

/// Monte-Carlo latent-posterior oracle for binary GP classification with a
/// probit likelihood: importance sampling from the prior N(0, K).
struct McGpcOracle {
  double log_ml = 0.0;                  // log E[prod Phi(y_i f_i)]
  std::vector<double> probabilities;    // predictive p(y*=+1) per query
};
McGpcOracle mc_gpc_oracle(const TrainingSet& ts,
                          const Eigen::MatrixXd& queries,
                          const KernelHyperparams& h, std::size_t samples,
                          std::uint64_t seed);

/// Random small binary training set with separated class means; used by the
/// EP-vs-oracle and gradient checks.
TrainingSet random_training_set(int n, int d_rgb, int d_depth,
                                std::uint64_t seed);

}  // namespace wsrd::testing
