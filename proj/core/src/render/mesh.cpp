#include "wsrd/render/mesh.hpp"

#include <Eigen/Dense>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace wsrd {

double TriangleMesh::face_area(std::size_t f) const {
  const auto& [a, b, c] = faces[f];
  return 0.5 * (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a])
                   .norm();
}

void TriangleMesh::bounding_sphere(Point3& center, double& radius) const {
  if (vertices.empty()) throw Error("empty mesh");
  Point3 lo = vertices.front(), hi = vertices.front();
  for (const Point3& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  center = 0.5 * (lo + hi);
  radius = 0.0;
  for (const Point3& v : vertices)
    radius = std::max(radius, (v - center).norm());
}

TriangleMesh read_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open off: " + path);

  // Header: "OFF" alone, or ModelNet's "OFF<nv> <nf> <ne>" on one line.
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty off: " + path);
  if (header.size() && header.back() == '\r') header.pop_back();
  if (header.rfind("OFF", 0) != 0) throw DataError("not an off file: " + path);

  std::size_t nv = 0, nf = 0, ne = 0;
  std::string tail = header.substr(3);
  if (tail.find_first_not_of(" \t") != std::string::npos) {
    std::istringstream ts(tail);
    if (!(ts >> nv >> nf >> ne)) throw DataError("bad off header: " + path);
  } else if (!(in >> nv >> nf >> ne)) {
    throw DataError("bad off header: " + path);
  }

  TriangleMesh mesh;
  mesh.vertices.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!(in >> mesh.vertices[i].x() >> mesh.vertices[i].y() >>
          mesh.vertices[i].z()))
      throw DataError("truncated off vertices: " + path);
  }
  for (std::size_t i = 0; i < nf; ++i) {
    std::size_t arity;
    if (!(in >> arity) || arity < 3)
      throw DataError("bad off face: " + path);
    std::vector<std::uint32_t> idx(arity);
    for (auto& v : idx) {
      if (!(in >> v)) throw DataError("truncated off face: " + path);
      if (v >= nv) throw DataError("off face index out of range: " + path);
    }
    for (std::size_t k = 1; k + 1 < arity; ++k)
      mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
  }

  // Drop zero-area triangles.
  std::vector<std::array<std::uint32_t, 3>> kept;
  kept.reserve(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f)
    if (mesh.face_area(f) > 0.0) kept.push_back(mesh.faces[f]);
  mesh.faces = std::move(kept);
  return mesh;
}

void write_off(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write off: " + path);
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size()
      << " 0\n";
  out << std::setprecision(17);
  for (const Point3& v : mesh.vertices)
    out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces)
    out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

}  // namespace wsrd
