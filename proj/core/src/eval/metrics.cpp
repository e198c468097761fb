#include "wsrd/eval/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

namespace wsrd {

double f_score(double p, double r) {
  if (p < 0.0 || p > 1.0 || r < 0.0 || r > 1.0)
    throw Error("precision/recall out of range");
  const double sum = p + r;
  return sum > 0.0 ? 2.0 * p * r / sum : 0.0;
}

double mask_iou(const GrayImage8& a, const GrayImage8& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error("resolution mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool pa = a.data[i] != 0, pb = b.data[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

std::map<int, Counts> match_instances(const AnnotatedFrame& frame) {
  std::map<int, Counts> counts;
  std::set<int> categories;
  for (const auto& gt : frame.ground_truth) categories.insert(gt.category);
  for (const auto& pr : frame.predictions) categories.insert(pr.category);

  for (int cat : categories) {
    std::vector<std::size_t> gts, prs;
    for (std::size_t i = 0; i < frame.ground_truth.size(); ++i)
      if (frame.ground_truth[i].category == cat) gts.push_back(i);
    for (std::size_t i = 0; i < frame.predictions.size(); ++i)
      if (frame.predictions[i].category == cat) prs.push_back(i);

    // All candidate pairs in descending IoU, greedy one-to-one.
    struct Pair {
      double iou;
      std::size_t pr, gt;
    };
    std::vector<Pair> pairs;
    for (std::size_t pi : prs)
      for (std::size_t gi : gts) {
        const double iou = mask_iou(frame.predictions[pi].mask,
                                    frame.ground_truth[gi].mask);
        if (iou > 0.5) pairs.push_back({iou, pi, gi});
      }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      return std::tie(a.pr, a.gt) < std::tie(b.pr, b.gt);
    });

    std::set<std::size_t> used_pr, used_gt;
    std::size_t tp = 0;
    for (const Pair& p : pairs) {
      if (used_pr.count(p.pr) || used_gt.count(p.gt)) continue;
      used_pr.insert(p.pr);
      used_gt.insert(p.gt);
      ++tp;
    }
    counts[cat] = {tp, prs.size() - tp, gts.size() - tp};
  }
  return counts;
}

namespace {

CategoryScores scores_from_counts(const Counts& c) {
  CategoryScores s;
  s.counts = c;
  // Precision defined as 0 when there are no predictions (0/0 case).
  s.precision = (c.tp + c.fp) > 0 ? double(c.tp) / double(c.tp + c.fp) : 0.0;
  s.recall = (c.tp + c.fn) > 0 ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  s.f_score = f_score(s.precision, s.recall);
  return s;
}

MetricsReport report_from_counts(const std::map<int, Counts>& per_category) {
  MetricsReport report;
  Counts total;
  for (const auto& [cat, c] : per_category) {
    report.per_category[cat] = scores_from_counts(c);
    total += c;
  }
  report.overall = scores_from_counts(total);
  return report;
}

}  // namespace

MetricsReport instance_metrics(const std::vector<AnnotatedFrame>& frames) {
  if (frames.empty()) throw Error("empty input");
  std::map<int, Counts> agg;
  for (const auto& frame : frames)
    for (const auto& [cat, c] : match_instances(frame)) agg[cat] += c;
  return report_from_counts(agg);
}

MetricsReport pixel_metrics(const std::vector<AnnotatedFrame>& frames) {
  if (frames.empty()) throw Error("empty input");
  std::map<int, Counts> agg;
  for (const auto& frame : frames) {
    std::set<int> categories;
    for (const auto& gt : frame.ground_truth) categories.insert(gt.category);
    for (const auto& pr : frame.predictions) categories.insert(pr.category);
    for (int cat : categories) {
      // Union of instance masks per category on this frame.
      GrayImage8 gt_union, pr_union;
      auto accumulate = [&](const std::vector<MaskInstance>& insts,
                            GrayImage8& target) {
        for (const auto& inst : insts) {
          if (inst.category != cat) continue;
          if (target.empty())
            target = GrayImage8(inst.mask.width, inst.mask.height, 0);
          if (target.width != inst.mask.width ||
              target.height != inst.mask.height)
            throw Error("resolution mismatch");
          for (std::size_t i = 0; i < target.data.size(); ++i)
            if (inst.mask.data[i]) target.data[i] = 255;
        }
      };
      accumulate(frame.ground_truth, gt_union);
      accumulate(frame.predictions, pr_union);

      Counts c;
      const std::size_t n =
          gt_union.empty() ? pr_union.data.size() : gt_union.data.size();
      for (std::size_t i = 0; i < n; ++i) {
        const bool g = !gt_union.empty() && gt_union.data[i] != 0;
        const bool p = !pr_union.empty() && pr_union.data[i] != 0;
        c.tp += g && p;
        c.fp += !g && p;
        c.fn += g && !p;
      }
      agg[cat] += c;
    }
  }
  return report_from_counts(agg);
}

namespace {

nlohmann::json report_json(const MetricsReport& r) {
  nlohmann::json j;
  auto put = [](const CategoryScores& s) {
    return nlohmann::json{{"precision", s.precision},
                          {"recall", s.recall},
                          {"f_score", s.f_score},
                          {"tp", s.counts.tp},
                          {"fp", s.counts.fp},
                          {"fn", s.counts.fn}};
  };
  for (const auto& [cat, s] : r.per_category)
    j["per_category"][std::to_string(cat)] = put(s);
  j["overall"] = put(r.overall);
  return j;
}

}  // namespace

std::string report_to_json(const MetricsReport& instance,
                           const MetricsReport& pixel) {
  nlohmann::json j;
  j["version"] = 1;
  j["instance_wise"] = report_json(instance);
  j["pixel_wise"] = report_json(pixel);
  return j.dump(2);
}

std::string report_to_table(const MetricsReport& instance,
                            const MetricsReport& pixel) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  std::set<int> cats;
  for (const auto& [cat, s] : instance.per_category) cats.insert(cat);
  for (const auto& [cat, s] : pixel.per_category) cats.insert(cat);

  out << std::left << std::setw(24) << "Metric";
  for (int cat : cats) out << std::right << std::setw(10) << cat;
  out << std::right << std::setw(10) << "Overall" << '\n';

  auto row = [&](const std::string& name, const MetricsReport& r,
                 auto getter) {
    out << std::left << std::setw(24) << name;
    for (int cat : cats) {
      auto it = r.per_category.find(cat);
      out << std::right << std::setw(9)
          << (it == r.per_category.end() ? 0.0 : getter(it->second) * 100.0)
          << '%';
    }
    out << std::right << std::setw(9) << getter(r.overall) * 100.0 << "%\n";
  };
  auto p = [](const CategoryScores& s) { return s.precision; };
  auto rr = [](const CategoryScores& s) { return s.recall; };
  auto f = [](const CategoryScores& s) { return s.f_score; };
  row("Precision (inst.w.)", instance, p);
  row("Recall (inst.w.)", instance, rr);
  row("F-Score (inst.w.)", instance, f);
  row("Precision (pix.w.)", pixel, p);
  row("Recall (pix.w.)", pixel, rr);
  row("F-Score (pix.w.)", pixel, f);
  return out.str();
}

}  // namespace wsrd
