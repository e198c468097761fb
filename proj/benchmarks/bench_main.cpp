#include <benchmark/benchmark.h>

#include <random>

#include "wsrd/detect/objectness.hpp"
#include "wsrd/geometry/camera.hpp"
#include "wsrd/geometry/point_cloud.hpp"
#include "wsrd/gpc/gpc.hpp"
#include "wsrd/render/synth_depth.hpp"

namespace {

using namespace wsrd;

Eigen::MatrixXd random_features(Eigen::Index n, Eigen::Index d,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = gauss(rng);
  return X;
}

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 0.5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> gray(0.0, 255.0);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.push_back(Point3(coord(rng), coord(rng), coord(rng)));
    cloud.normals.push_back(
        Point3(unit(rng), unit(rng), unit(rng)).normalized());
    cloud.intensities.push_back(gray(rng));
  }
  return cloud;
}

void BM_GramMatrix(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd X = random_features(n, 88, 1);
  const KernelHyperparams h;
  for (auto _ : state)
    benchmark::DoNotOptimize(kernel_matrix(h, X, 56));
  state.SetComplexityN(n);
}
BENCHMARK(BM_GramMatrix)->Range(32, 512)->Complexity(benchmark::oNSquared);

void BM_Clustering(benchmark::State& state) {
  const PointCloud cloud = random_cloud(std::size_t(state.range(0)), 2);
  ClusteringParams params;
  params.min_cluster_points = 1;
  params.min_cluster_extent = 1e-9;
  for (auto _ : state)
    benchmark::DoNotOptimize(cluster_proposals(cloud, params));
}
BENCHMARK(BM_Clustering)->Range(1000, 32000);

void BM_Projection(benchmark::State& state) {
  const CameraModel cam(500, 500, 250, 250, Eigen::Matrix3d::Identity(),
                        Eigen::Vector3d::Zero(), 500, 500);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<Point3> points;
  for (int i = 0; i < 100000; ++i)
    points.push_back(Point3(coord(rng), coord(rng), 2.0 + coord(rng)));
  for (auto _ : state) {
    double sum = 0.0;
    for (const Point3& p : points) sum += project_point(cam, p).u;
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(points.size()));
}
BENCHMARK(BM_Projection);

void BM_HiddenPointRemoval(benchmark::State& state) {
  const PointCloud cloud = random_cloud(std::size_t(state.range(0)), 4);
  const Point3 eye(0.25, 0.25, 3.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(hidden_point_removal(cloud, eye, 3.0));
}
BENCHMARK(BM_HiddenPointRemoval)->Range(1000, 16000);

}  // namespace

BENCHMARK_MAIN();
