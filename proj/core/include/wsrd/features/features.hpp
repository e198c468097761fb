#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "wsrd/image/image.hpp"

namespace wsrd {

enum class Modality { Rgb, Depth, Fused };

/// Fixed-length real descriptor. Fused vectors remember the rgb/depth
/// split index for the product kernel.
struct FeatureVector {
  Eigen::VectorXd values;
  Modality modality = Modality::Fused;
  int split = 0;  // fused: length of the leading rgb block

  int dimension() const { return int(values.size()); }
};

/// Dimensions of the built-in descriptors.
inline constexpr int kRgbFeatureDim = 56;    // 3x16 color + 8 gradient bins
inline constexpr int kDepthFeatureDim = 32;  // 16 depth + 8 grad + 8 normal

/// 3x16-bin color histograms plus an 8-bin gradient-orientation histogram
/// on luminance, L2-normalized. Throws Error("empty crop").
FeatureVector extract_rgb_features(const RgbImage8& crop);

/// 16-bin min-max-normalized depth histogram + 8-bin depth-gradient
/// orientation histogram + 8-bin surface-slope histogram from depth
/// derivatives, L2-normalized. Zero pixels are missing data; throws
/// Error("no valid depth") if none is valid.
FeatureVector extract_depth_features(const GrayImage16& crop);

/// Concatenates rgb and depth descriptors into a fused vector (rgb block
/// first, split index recorded). Throws Error("modality mismatch").
FeatureVector concat_features(const FeatureVector& rgb,
                              const FeatureVector& depth);

/// CSV feature matrix with header "id,f0,f1,...": row-aligned ids and
/// rows. Validates uniform row length ("inconsistent dimension") and
/// finite values ("invalid value"). An empty file yields an empty matrix.
struct FeatureMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd rows;
};

FeatureMatrix load_feature_matrix(const std::string& path);
void save_feature_matrix(const std::string& path, const FeatureMatrix& m);

}  // namespace wsrd
