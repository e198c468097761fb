#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "wsrd/eval/metrics.hpp"

using namespace wsrd;

namespace {

GrayImage8 rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  GrayImage8 mask(w, h, 0);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) mask.at(x, y) = 255;
  return mask;
}

}  // namespace

TEST_CASE("f-score arithmetic reproduces the reference operating points") {
  CHECK(std::abs(f_score(0.8085, 0.8353) - 0.8217) < 1e-4);
  CHECK(std::abs(f_score(0.7552, 0.7039) - 0.7287) < 1e-4);
  CHECK(f_score(0.0, 0.0) == 0.0);
  CHECK(f_score(1.0, 1.0) == 1.0);
  CHECK_THROWS_WITH_AS(f_score(1.2, 0.5), "precision/recall out of range",
                       Error);
  CHECK_THROWS_WITH_AS(f_score(0.5, -0.1), "precision/recall out of range",
                       Error);
}

TEST_CASE("mask iou on rectangles") {
  const auto a = rect_mask(20, 20, 0, 0, 9, 9);    // 100 px
  const auto b = rect_mask(20, 20, 5, 0, 14, 9);   // 100 px, overlap 50
  CHECK(mask_iou(a, b) == doctest::Approx(50.0 / 150.0));
  CHECK(mask_iou(a, a) == doctest::Approx(1.0));
  const GrayImage8 empty(20, 20, 0);
  CHECK(mask_iou(empty, empty) == 0.0);
  const auto wrong = rect_mask(10, 10, 0, 0, 5, 5);
  CHECK_THROWS_WITH_AS(mask_iou(a, wrong), "resolution mismatch", Error);
}

TEST_CASE("matching requires iou strictly above one half") {
  AnnotatedFrame frame;
  frame.frame_id = "f";
  frame.ground_truth.push_back({0, rect_mask(30, 30, 0, 0, 9, 9)});
  // Exactly IoU = 0.5 against the ground truth: 100 vs 150 union... use a
  // shifted rectangle overlapping 2/3: overlap 50, union 150 -> 1/3, no TP.
  frame.predictions.push_back({0, rect_mask(30, 30, 5, 0, 14, 9)});
  auto counts = match_instances(frame);
  CHECK(counts[0].tp == 0);
  CHECK(counts[0].fp == 1);
  CHECK(counts[0].fn == 1);

  // Identical mask, wrong category: still no match.
  frame.predictions[0] = {1, rect_mask(30, 30, 0, 0, 9, 9)};
  counts = match_instances(frame);
  CHECK(counts[0].tp == 0);
  CHECK(counts[1].fp == 1);

  // Same category and high overlap: one TP, and one-to-one matching.
  frame.predictions[0] = {0, rect_mask(30, 30, 0, 0, 9, 9)};
  frame.predictions.push_back({0, rect_mask(30, 30, 0, 0, 9, 8)});
  counts = match_instances(frame);
  CHECK(counts[0].tp == 1);
  CHECK(counts[0].fp == 1);
  CHECK(counts[0].fn == 0);
}

TEST_CASE("greedy matching picks the highest-overlap pair first") {
  AnnotatedFrame frame;
  frame.ground_truth.push_back({0, rect_mask(40, 40, 0, 0, 9, 9)});
  frame.predictions.push_back({0, rect_mask(40, 40, 0, 0, 9, 8)});  // 0.9
  frame.predictions.push_back({0, rect_mask(40, 40, 0, 0, 9, 9)});  // 1.0
  const auto counts = match_instances(frame);
  CHECK(counts.at(0).tp == 1);
  CHECK(counts.at(0).fp == 1);
}

TEST_CASE("aggregate metrics pool counts before computing rates") {
  // Frame 1: one matched instance. Frame 2: one miss and one false alarm.
  std::vector<AnnotatedFrame> frames(2);
  frames[0].ground_truth.push_back({0, rect_mask(30, 30, 0, 0, 9, 9)});
  frames[0].predictions.push_back({0, rect_mask(30, 30, 0, 0, 9, 9)});
  frames[1].ground_truth.push_back({0, rect_mask(30, 30, 15, 15, 24, 24)});
  frames[1].predictions.push_back({0, rect_mask(30, 30, 0, 0, 9, 9)});

  const MetricsReport report = instance_metrics(frames);
  // tp 1, fp 1, fn 1 pooled -> P = R = 0.5.
  CHECK(report.overall.precision == doctest::Approx(0.5));
  CHECK(report.overall.recall == doctest::Approx(0.5));
  CHECK(report.overall.f_score == doctest::Approx(0.5));
  CHECK(report.per_category.at(0).counts.tp == 1);
}

TEST_CASE("pixel metrics count per-pixel category unions") {
  std::vector<AnnotatedFrame> frames(1);
  frames[0].ground_truth.push_back({0, rect_mask(20, 20, 0, 0, 9, 9)});
  frames[0].predictions.push_back({0, rect_mask(20, 20, 5, 0, 14, 9)});
  const MetricsReport report = pixel_metrics(frames);
  // 50 shared pixels of 100 predicted and 100 true.
  CHECK(report.per_category.at(0).precision == doctest::Approx(0.5));
  CHECK(report.per_category.at(0).recall == doctest::Approx(0.5));
}

TEST_CASE("empty denominators score zero, not nan") {
  std::vector<AnnotatedFrame> frames(1);
  frames[0].ground_truth.push_back({0, rect_mask(10, 10, 0, 0, 5, 5)});
  const MetricsReport report = instance_metrics(frames);
  CHECK(report.per_category.at(0).precision == 0.0);
  CHECK(report.per_category.at(0).recall == 0.0);
  CHECK(report.per_category.at(0).f_score == 0.0);
}

TEST_CASE("reports serialize with a version field and a readable table") {
  std::vector<AnnotatedFrame> frames(1);
  frames[0].ground_truth.push_back({2, rect_mask(10, 10, 0, 0, 5, 5)});
  frames[0].predictions.push_back({2, rect_mask(10, 10, 0, 0, 5, 5)});
  const MetricsReport inst = instance_metrics(frames);
  const MetricsReport pix = pixel_metrics(frames);

  const nlohmann::json j = nlohmann::json::parse(report_to_json(inst, pix));
  CHECK(j.contains("version"));
  CHECK(j.at("instance_wise").at("overall").at("f_score").get<double>() ==
        doctest::Approx(1.0));

  const std::string table = report_to_table(inst, pix);
  CHECK(table.find("Overall") != std::string::npos);
}
