#include "wsrd/features/features.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace wsrd {
namespace {

void l2_normalize(Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
}

/// Bins an orientation in radians into `bins` over [0, 2*pi).
int orientation_bin(double gx, double gy, int bins) {
  double angle = std::atan2(gy, gx);
  if (angle < 0.0) angle += 2.0 * std::numbers::pi;
  int b = int(angle / (2.0 * std::numbers::pi) * bins);
  return std::min(b, bins - 1);
}

}  // namespace

FeatureVector extract_rgb_features(const RgbImage8& crop) {
  if (crop.empty()) throw Error("empty crop");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(kRgbFeatureDim);
  for (int y = 0; y < crop.height; ++y)
    for (int x = 0; x < crop.width; ++x)
      for (int c = 0; c < 3; ++c)
        v[c * 16 + std::min(crop.at(x, y, c) / 16, 15)] += 1.0;

  // Gradient-orientation histogram on luminance, central differences.
  auto lum = [&](int x, int y) {
    return (double(crop.at(x, y, 0)) + crop.at(x, y, 1) + crop.at(x, y, 2)) /
           3.0;
  };
  for (int y = 1; y + 1 < crop.height; ++y)
    for (int x = 1; x + 1 < crop.width; ++x) {
      const double gx = 0.5 * (lum(x + 1, y) - lum(x - 1, y));
      const double gy = 0.5 * (lum(x, y + 1) - lum(x, y - 1));
      const double mag = std::hypot(gx, gy);
      if (mag < 1e-12) continue;
      v[48 + orientation_bin(gx, gy, 8)] += mag;
    }

  l2_normalize(v);
  return {v, Modality::Rgb, 0};
}

FeatureVector extract_depth_features(const GrayImage16& crop) {
  if (crop.empty()) throw Error("empty crop");

  double lo = 65535.0, hi = 0.0;
  std::size_t valid = 0;
  for (std::uint16_t d : crop.data) {
    if (d == 0) continue;
    lo = std::min(lo, double(d));
    hi = std::max(hi, double(d));
    ++valid;
  }
  if (valid == 0) throw Error("no valid depth");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(kDepthFeatureDim);
  const double span = std::max(hi - lo, 1.0);
  for (std::uint16_t d : crop.data) {
    if (d == 0) continue;
    v[std::min(int((double(d) - lo) / span * 16.0), 15)] += 1.0;
  }

  for (int y = 1; y + 1 < crop.height; ++y)
    for (int x = 1; x + 1 < crop.width; ++x) {
      const std::uint16_t c = crop.at(x, y);
      const std::uint16_t xm = crop.at(x - 1, y), xp = crop.at(x + 1, y);
      const std::uint16_t ym = crop.at(x, y - 1), yp = crop.at(x, y + 1);
      if (c == 0 || xm == 0 || xp == 0 || ym == 0 || yp == 0) continue;
      const double gx = 0.5 * (double(xp) - double(xm));
      const double gy = 0.5 * (double(yp) - double(ym));
      const double mag = std::hypot(gx, gy);
      if (mag >= 1e-12) v[16 + orientation_bin(gx, gy, 8)] += mag;
      // Surface slope from depth derivatives: angle between the local
      // normal (-gx, -gy, 1) and the optical axis, binned over [0, 90).
      const double slope =
          std::atan(std::hypot(gx, gy)) * 180.0 / std::numbers::pi;
      v[24 + std::min(int(slope / 90.0 * 8.0), 7)] += 1.0;
    }

  l2_normalize(v);
  return {v, Modality::Depth, 0};
}

FeatureVector concat_features(const FeatureVector& rgb,
                              const FeatureVector& depth) {
  if (rgb.modality != Modality::Rgb || depth.modality != Modality::Depth)
    throw Error("modality mismatch");
  FeatureVector fused;
  fused.modality = Modality::Fused;
  fused.split = rgb.dimension();
  fused.values.resize(rgb.dimension() + depth.dimension());
  fused.values << rgb.values, depth.values;
  return fused;
}

FeatureMatrix load_feature_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file: " + path);

  FeatureMatrix m;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_skipped = false;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_skipped && line.rfind("id,", 0) == 0) {
      header_skipped = true;
      continue;
    }
    header_skipped = true;
    std::istringstream ls(line);
    std::string id, cell;
    if (!std::getline(ls, id, ',')) throw DataError("bad feature row");
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) {
      double value;
      try {
        value = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError("invalid value");
      }
      if (!std::isfinite(value)) throw DataError("invalid value");
      row.push_back(value);
    }
    if (dim < 0)
      dim = Eigen::Index(row.size());
    else if (Eigen::Index(row.size()) != dim)
      throw DataError("inconsistent dimension");
    m.ids.push_back(id);
    rows.push_back(std::move(row));
  }

  m.rows.resize(Eigen::Index(rows.size()), std::max<Eigen::Index>(dim, 0));
  for (Eigen::Index r = 0; r < m.rows.rows(); ++r)
    for (Eigen::Index c = 0; c < m.rows.cols(); ++c)
      m.rows(r, c) = rows[r][c];
  return m;
}

void save_feature_matrix(const std::string& path, const FeatureMatrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write feature file: " + path);
  out << "id";
  for (Eigen::Index c = 0; c < m.rows.cols(); ++c) out << ",f" << c;
  out << '\n';
  out.precision(17);
  for (Eigen::Index r = 0; r < m.rows.rows(); ++r) {
    out << m.ids[std::size_t(r)];
    for (Eigen::Index c = 0; c < m.rows.cols(); ++c)
      out << ',' << m.rows(r, c);
    out << '\n';
  }
}

}  // namespace wsrd
