#include "wsrd/render/convex_hull.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace wsrd {
namespace {

struct Face {
  std::array<int, 3> v;   // CCW seen from outside
  std::array<int, 3> nb;  // neighbor across directed edge (v[i], v[i+1])
  Point3 n = Point3::Zero();
  double d = 0.0;  // plane n.x + d = 0
  std::vector<int> outside;
  int far_idx = -1;
  double far_dist = 0.0;
  bool alive = true;
};

struct Builder {
  const std::vector<Point3>& pts;
  double eps;
  std::vector<Face> faces;

  double dist(const Face& f, int p) const { return f.n.dot(pts[p]) + f.d; }

  void set_plane(Face& f) {
    const Point3& a = pts[f.v[0]];
    f.n = (pts[f.v[1]] - a).cross(pts[f.v[2]] - a);
    const double norm = f.n.norm();
    if (norm > 0) f.n /= norm;
    f.d = -f.n.dot(a);
  }

  void claim(Face& f, int p) {
    const double d = dist(f, p);
    f.outside.push_back(p);
    if (d > f.far_dist) {
      f.far_dist = d;
      f.far_idx = p;
    }
  }
};

}  // namespace

std::vector<std::size_t> convex_hull_vertices(
    const std::vector<Point3>& points) {
  const std::size_t n = points.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (n < 4) return all;

  Point3 lo = points[0], hi = points[0];
  for (const Point3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).norm();
  const double eps = std::max(scale, 1.0) * 1e-10;

  // Initial simplex: farthest axis-extreme pair, then the point farthest
  // from their line, then the point farthest from the resulting plane.
  int i0 = 0, i1 = 0;
  {
    int ext[6] = {0, 0, 0, 0, 0, 0};
    for (int i = 1; i < int(n); ++i)
      for (int a = 0; a < 3; ++a) {
        if (points[i][a] < points[ext[a]][a]) ext[a] = i;
        if (points[i][a] > points[ext[3 + a]][a]) ext[3 + a] = i;
      }
    double best = -1.0;
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b) {
        const double d = (points[ext[a]] - points[ext[b]]).squaredNorm();
        if (d > best) {
          best = d;
          i0 = ext[a];
          i1 = ext[b];
        }
      }
    if (best <= eps * eps) return all;  // all points coincident
  }
  const Point3 dir = (points[i1] - points[i0]).normalized();
  int i2 = -1;
  double best2 = eps;
  for (int i = 0; i < int(n); ++i) {
    const Point3 r = points[i] - points[i0];
    const double d = (r - r.dot(dir) * dir).norm();
    if (d > best2) {
      best2 = d;
      i2 = i;
    }
  }
  if (i2 < 0) return all;  // collinear
  Point3 pn = (points[i1] - points[i0]).cross(points[i2] - points[i0]);
  pn.normalize();
  const double pd = -pn.dot(points[i0]);
  int i3 = -1;
  double best3 = eps;
  for (int i = 0; i < int(n); ++i) {
    const double d = std::abs(pn.dot(points[i]) + pd);
    if (d > best3) {
      best3 = d;
      i3 = i;
    }
  }
  if (i3 < 0) return all;  // coplanar
  if (pn.dot(points[i3]) + pd > 0) std::swap(i1, i2);  // make i3 below plane

  Builder B{points, eps, {}};
  auto add_face = [&](int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.nb = {-1, -1, -1};
    B.set_plane(f);
    B.faces.push_back(std::move(f));
  };
  add_face(i0, i1, i2);
  add_face(i1, i0, i3);
  add_face(i2, i1, i3);
  add_face(i0, i2, i3);

  // Stitch tetrahedron adjacency via a directed edge map.
  {
    std::map<std::pair<int, int>, std::pair<int, int>> edge;  // (a,b)->(face,slot)
    for (int fi = 0; fi < int(B.faces.size()); ++fi)
      for (int e = 0; e < 3; ++e)
        edge[{B.faces[fi].v[e], B.faces[fi].v[(e + 1) % 3]}] = {fi, e};
    for (auto& [key, val] : edge) {
      const auto rev = edge.at({key.second, key.first});
      B.faces[val.first].nb[val.second] = rev.first;
    }
  }

  const std::set<int> simplex = {i0, i1, i2, i3};
  for (int p = 0; p < int(n); ++p) {
    if (simplex.count(p)) continue;
    for (Face& f : B.faces)
      if (B.dist(f, p) > eps) {
        B.claim(f, p);
        break;
      }
  }

  std::vector<int> stack;
  for (int fi = 0; fi < int(B.faces.size()); ++fi)
    if (!B.faces[fi].outside.empty()) stack.push_back(fi);

  const std::size_t max_iters = 16 * n + 256;
  std::size_t iters = 0;
  while (!stack.empty() && iters++ < max_iters) {
    const int fi = stack.back();
    stack.pop_back();
    if (!B.faces[fi].alive || B.faces[fi].outside.empty()) continue;
    const int apex = B.faces[fi].far_idx;

    // Flood the faces visible from the apex; record horizon crossings.
    std::vector<int> visible{fi};
    std::vector<std::array<int, 3>> horizon;  // (a, b, non-visible face)
    std::set<int> seen{fi};
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const Face& f = B.faces[visible[k]];
      for (int e = 0; e < 3; ++e) {
        const int g = f.nb[e];
        if (seen.count(g)) continue;
        if (B.dist(B.faces[g], apex) > B.eps) {
          seen.insert(g);
          visible.push_back(g);
        } else {
          horizon.push_back({f.v[e], f.v[(e + 1) % 3], g});
        }
      }
    }

    std::vector<int> orphans;
    for (int vi : visible) {
      Face& f = B.faces[vi];
      f.alive = false;
      for (int p : f.outside)
        if (p != apex) orphans.push_back(p);
      f.outside.clear();
    }

    std::map<int, int> by_a, by_b;  // horizon vertex -> new face index
    std::vector<int> created;
    for (const auto& [a, b, g] : horizon) {
      Face f;
      f.v = {a, b, apex};
      f.nb = {g, -1, -1};
      B.set_plane(f);
      const int nf = int(B.faces.size());
      // Relink the surviving neighbor across (b, a).
      for (int e = 0; e < 3; ++e)
        if (B.faces[g].v[e] == b && B.faces[g].v[(e + 1) % 3] == a)
          B.faces[g].nb[e] = nf;
      by_a[a] = nf;
      by_b[b] = nf;
      created.push_back(nf);
      B.faces.push_back(std::move(f));
    }
    for (int nf : created) {
      Face& f = B.faces[nf];
      f.nb[1] = by_a.at(f.v[1]);  // across (b, apex)
      f.nb[2] = by_b.at(f.v[0]);  // across (apex, a)
    }

    for (int p : orphans)
      for (int nf : created)
        if (B.dist(B.faces[nf], p) > B.eps) {
          B.claim(B.faces[nf], p);
          break;
        }
    for (int nf : created)
      if (!B.faces[nf].outside.empty()) stack.push_back(nf);
  }

  std::set<std::size_t> verts;
  for (const Face& f : B.faces)
    if (f.alive)
      for (int v : f.v) verts.insert(std::size_t(v));
  return {verts.begin(), verts.end()};
}

}  // namespace wsrd
