#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsrd/image/image.hpp"

namespace wsrd {

struct MaskInstance {
  int category = 0;
  GrayImage8 mask;  // 0/255
};

struct AnnotatedFrame {
  std::string frame_id;
  std::vector<MaskInstance> ground_truth;
  std::vector<MaskInstance> predictions;
};

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct CategoryScores {
  double precision = 0.0, recall = 0.0, f_score = 0.0;
  Counts counts;
};

struct MetricsReport {
  std::map<int, CategoryScores> per_category;
  CategoryScores overall;
};

/// 2pr/(p+r), 0 when p + r = 0. Inputs must lie in [0, 1].
double f_score(double p, double r);

/// Intersection-over-union of two equal-resolution masks.
double mask_iou(const GrayImage8& a, const GrayImage8& b);

/// Instance-wise counts per category: greedy one-to-one matching in
/// descending IoU order; a prediction is a TP iff matched to a
/// same-category ground truth with IoU strictly above 0.5.
std::map<int, Counts> match_instances(const AnnotatedFrame& frame);

/// Aggregates instance counts over frames into precision/recall/F.
MetricsReport instance_metrics(const std::vector<AnnotatedFrame>& frames);

/// Pixel-wise TP/FP/FN per category aggregated over frames before the
/// precision/recall/F computation.
MetricsReport pixel_metrics(const std::vector<AnnotatedFrame>& frames);

/// JSON + aligned plain-text rendering of a report pair.
std::string report_to_json(const MetricsReport& instance,
                           const MetricsReport& pixel);
std::string report_to_table(const MetricsReport& instance,
                            const MetricsReport& pixel);

}  // namespace wsrd
