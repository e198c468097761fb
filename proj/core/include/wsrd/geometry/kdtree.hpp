#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <numeric>
#include <queue>
#include <vector>

#include "wsrd/geometry/point_cloud.hpp"

namespace wsrd {

/// Static 3D kd-tree over an externally owned point array. Supports k-NN
/// and radius queries. Build is O(n log n) via nth_element.
class KdTree {
 public:
  explicit KdTree(const std::vector<Point3>& points) : points_(points) {
    index_.resize(points.size());
    std::iota(index_.begin(), index_.end(), std::size_t{0});
    if (!index_.empty()) build(0, index_.size(), 0);
  }

  /// Indices of the k nearest points to `query` (including an identical
  /// point if present), ordered nearest first.
  std::vector<std::size_t> knn(const Point3& query, std::size_t k) const {
    KnnHeap heap{k, {}};
    if (!index_.empty()) search_knn(0, index_.size(), 0, query, heap);
    std::sort(heap.items.begin(), heap.items.end());
    std::vector<std::size_t> out;
    out.reserve(heap.items.size());
    for (const auto& [d2, idx] : heap.items) out.push_back(idx);
    return out;
  }

  std::vector<std::size_t> radius(const Point3& query, double r) const {
    std::vector<std::size_t> out;
    if (!index_.empty()) search_radius(0, index_.size(), 0, query, r * r, out);
    return out;
  }

 private:
  struct KnnHeap {
    std::size_t k;
    std::vector<std::pair<double, std::size_t>> items;  // max-heap by d2

    double worst() const {
      return items.size() < k ? std::numeric_limits<double>::infinity()
                              : items.front().first;
    }
    void push(double d2, std::size_t idx) {
      if (items.size() < k) {
        items.emplace_back(d2, idx);
        std::push_heap(items.begin(), items.end());
      } else if (d2 < items.front().first) {
        std::pop_heap(items.begin(), items.end());
        items.back() = {d2, idx};
        std::push_heap(items.begin(), items.end());
      }
    }
  };

  void build(std::size_t lo, std::size_t hi, int depth) {
    if (hi - lo <= 1) return;
    const int axis = depth % 3;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid,
                     index_.begin() + hi,
                     [&](std::size_t a, std::size_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search_knn(std::size_t lo, std::size_t hi, int depth,
                  const Point3& query, KnnHeap& heap) const {
    if (lo >= hi) return;
    const int axis = depth % 3;
    const std::size_t mid = (lo + hi) / 2;
    const Point3& p = points_[index_[mid]];
    heap.push((p - query).squaredNorm(), index_[mid]);
    const double delta = query[axis] - p[axis];
    const bool left_first = delta < 0.0;
    const auto [n_lo, n_hi] =
        left_first ? std::pair{lo, mid} : std::pair{mid + 1, hi};
    const auto [f_lo, f_hi] =
        left_first ? std::pair{mid + 1, hi} : std::pair{lo, mid};
    search_knn(n_lo, n_hi, depth + 1, query, heap);
    if (delta * delta < heap.worst())
      search_knn(f_lo, f_hi, depth + 1, query, heap);
  }

  void search_radius(std::size_t lo, std::size_t hi, int depth,
                     const Point3& query, double r2,
                     std::vector<std::size_t>& out) const {
    if (lo >= hi) return;
    const int axis = depth % 3;
    const std::size_t mid = (lo + hi) / 2;
    const Point3& p = points_[index_[mid]];
    if ((p - query).squaredNorm() <= r2) out.push_back(index_[mid]);
    const double delta = query[axis] - p[axis];
    if (delta < 0.0 || delta * delta <= r2)
      search_radius(lo, mid, depth + 1, query, r2, out);
    if (delta > 0.0 || delta * delta <= r2)
      search_radius(mid + 1, hi, depth + 1, query, r2, out);
  }

  const std::vector<Point3>& points_;
  std::vector<std::size_t> index_;
};

}  // namespace wsrd
