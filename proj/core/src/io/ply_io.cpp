#include "wsrd/io/ply_io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

namespace wsrd {
namespace {

enum class ScalarType { F32, F64, I8, U8, I16, U16, I32, U32 };

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::I8:
    case ScalarType::U8:
      return 1;
    case ScalarType::I16:
    case ScalarType::U16:
      return 2;
    case ScalarType::I32:
    case ScalarType::U32:
    case ScalarType::F32:
      return 4;
    case ScalarType::F64:
      return 8;
  }
  return 0;
}

ScalarType parse_type(const std::string& s) {
  static const std::map<std::string, ScalarType> table = {
      {"float", ScalarType::F32},  {"float32", ScalarType::F32},
      {"double", ScalarType::F64}, {"float64", ScalarType::F64},
      {"char", ScalarType::I8},    {"int8", ScalarType::I8},
      {"uchar", ScalarType::U8},   {"uint8", ScalarType::U8},
      {"short", ScalarType::I16},  {"int16", ScalarType::I16},
      {"ushort", ScalarType::U16}, {"uint16", ScalarType::U16},
      {"int", ScalarType::I32},    {"int32", ScalarType::I32},
      {"uint", ScalarType::U32},   {"uint32", ScalarType::U32}};
  auto it = table.find(s);
  if (it == table.end()) throw DataError("unknown ply scalar type: " + s);
  return it->second;
}

double decode(ScalarType t, const char* p) {
  switch (t) {
    case ScalarType::F32: {
      float v;
      std::memcpy(&v, p, 4);
      return v;
    }
    case ScalarType::F64: {
      double v;
      std::memcpy(&v, p, 8);
      return v;
    }
    case ScalarType::I8:
      return *reinterpret_cast<const std::int8_t*>(p);
    case ScalarType::U8:
      return *reinterpret_cast<const std::uint8_t*>(p);
    case ScalarType::I16: {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      return v;
    }
    case ScalarType::U16: {
      std::uint16_t v;
      std::memcpy(&v, p, 2);
      return v;
    }
    case ScalarType::I32: {
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return v;
    }
    case ScalarType::U32: {
      std::uint32_t v;
      std::memcpy(&v, p, 4);
      return v;
    }
  }
  return 0.0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::F32;
  bool is_list = false;
  ScalarType count_type = ScalarType::U8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
};

}  // namespace

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open ply: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty ply: " + path);
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != "ply") throw DataError("not a ply file: " + path);

  bool binary = false;
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    if (line.size() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        throw DataError("unsupported ply format: " + fmt);
    } else if (kw == "element") {
      Element e;
      if (!(ls >> e.name >> e.count)) throw DataError("bad element line");
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw DataError("property before element");
      Property p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, vt;
        if (!(ls >> ct >> vt >> p.name)) throw DataError("bad list property");
        p.is_list = true;
        p.count_type = parse_type(ct);
        p.type = parse_type(vt);
      } else {
        p.type = parse_type(t);
        if (!(ls >> p.name)) throw DataError("bad property line");
      }
      elements.back().props.push_back(p);
    } else if (kw == "end_header") {
      break;
    } else {
      throw DataError("unknown ply header keyword: " + kw);
    }
  }

  PointCloud cloud;
  for (const Element& e : elements) {
    const bool is_vertex = (e.name == "vertex");
    std::map<std::string, std::vector<double>> channels;
    for (std::size_t i = 0; i < e.count; ++i) {
      for (const Property& p : e.props) {
        if (p.is_list) {
          double n = 0;
          if (binary) {
            char buf[8];
            if (!in.read(buf, scalar_size(p.count_type)))
              throw DataError("truncated ply: " + path);
            n = decode(p.count_type, buf);
          } else if (!(in >> n)) {
            throw DataError("truncated ply: " + path);
          }
          for (std::size_t j = 0; j < std::size_t(n); ++j) {
            if (binary) {
              char buf[8];
              if (!in.read(buf, scalar_size(p.type)))
                throw DataError("truncated ply: " + path);
            } else {
              double v;
              if (!(in >> v)) throw DataError("truncated ply: " + path);
            }
          }
        } else {
          double v;
          if (binary) {
            char buf[8];
            if (!in.read(buf, scalar_size(p.type)))
              throw DataError("truncated ply: " + path);
            v = decode(p.type, buf);
          } else if (!(in >> v)) {
            throw DataError("truncated ply: " + path);
          }
          if (is_vertex) channels[p.name].push_back(v);
        }
      }
    }
    if (!is_vertex) continue;

    auto get = [&](const char* name) -> const std::vector<double>* {
      auto it = channels.find(name);
      return it == channels.end() ? nullptr : &it->second;
    };
    const auto *x = get("x"), *y = get("y"), *z = get("z");
    if (!x || !y || !z) throw DataError("ply missing x/y/z: " + path);
    cloud.points.resize(e.count);
    for (std::size_t i = 0; i < e.count; ++i)
      cloud.points[i] = Point3((*x)[i], (*y)[i], (*z)[i]);

    const auto *r = get("red"), *g = get("green"), *b = get("blue");
    if (r && g && b) {
      cloud.colors.resize(e.count);
      for (std::size_t i = 0; i < e.count; ++i)
        cloud.colors[i] = {std::uint8_t((*r)[i]), std::uint8_t((*g)[i]),
                           std::uint8_t((*b)[i])};
    }
    const auto *nx = get("nx"), *ny = get("ny"), *nz = get("nz");
    if (nx && ny && nz) {
      cloud.normals.resize(e.count);
      for (std::size_t i = 0; i < e.count; ++i)
        cloud.normals[i] = Point3((*nx)[i], (*ny)[i], (*nz)[i]);
    }
  }
  cloud.validate();
  return cloud;
}

void write_ply(const std::string& path, const PointCloud& cloud) {
  cloud.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ply: " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (cloud.has_normals())
    out << "property double nx\nproperty double ny\nproperty double nz\n";
  out << "end_header\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (cloud.has_colors())
      out << ' ' << int(cloud.colors[i][0]) << ' ' << int(cloud.colors[i][1])
          << ' ' << int(cloud.colors[i][2]);
    if (cloud.has_normals()) {
      const Point3& n = cloud.normals[i];
      out << ' ' << n.x() << ' ' << n.y() << ' ' << n.z();
    }
    out << '\n';
  }
}

}  // namespace wsrd
