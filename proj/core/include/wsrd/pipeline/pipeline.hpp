#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsrd/eval/metrics.hpp"
#include "wsrd/geometry/point_cloud.hpp"
#include "wsrd/learn/propagate_train.hpp"
#include "wsrd/pipeline/config.hpp"

namespace wsrd {

/// One objectness proposal as recorded in the JSON-lines manifest.
struct ProposalRecord {
  std::string id;        // "<frame>#<k>"
  std::string frame_id;
  std::string mask_path;
  std::string indices_path;
  int u_min = 0, v_min = 0, u_max = 0, v_max = 0;
  Point3 centroid = Point3::Zero();
};

struct DetectResult {
  std::size_t frame_count = 0;
  std::vector<ProposalRecord> proposals;
  std::string manifest_path;
};

/// remove_planes -> cluster_proposals -> proposal_to_mask per *.ply frame
/// under frames_dir; masks and index lists land under out_dir with a
/// proposals.jsonl manifest (written last, so a failing frame leaves no
/// partial manifest).
DetectResult run_detect(const std::string& frames_dir,
                        const std::string& camera_path,
                        const PipelineConfig& cfg, const std::string& out_dir);

std::vector<ProposalRecord> read_proposal_manifest(const std::string& path);

/// Rasterizes each frame cloud to RGB + depth images, crops every proposal
/// bbox, and writes features_rgb.csv / features_depth.csv keyed by
/// proposal id.
void run_features(const std::string& frames_dir,
                  const std::string& camera_path,
                  const std::string& manifest_path,
                  const std::string& out_dir);

/// id,label,provenance,confidence rows.
struct LabelRow {
  std::string id;
  int label = 0;
  Provenance provenance = Provenance::Manual;
  double confidence = 1.0;
};

std::vector<LabelRow> read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path,
                      const std::vector<LabelRow>& rows);

/// Loads the rgb/depth CSV pair from features_dir and fuses them row-wise
/// (rgb block first); returns ids, matrix, and the split index.
struct FusedFeatures {
  std::vector<std::string> ids;
  Eigen::MatrixXd X;
  int split = 0;
};
FusedFeatures load_fused_features(const std::string& features_dir);

/// One binary GPC per category present in the manual labels, hyperparams
/// optimized by log-marginal-likelihood ascent. Writes
/// out_dir/gpc_<category>.json.
std::map<int, std::string> run_train_gpc(const std::string& features_dir,
                                         const std::string& labels_path,
                                         const PipelineConfig& cfg,
                                         const std::string& out_dir);

/// Scores the unlabeled pool (features minus manual ids) with the trained
/// per-category models and keeps confident items. Writes propagated.csv
/// and propagation_report.json.
PropagationResult run_propagate(const std::string& features_dir,
                                const std::string& labels_path,
                                const std::string& models_dir,
                                const PipelineConfig& cfg,
                                const std::string& out_dir);

/// Trains the weighted linear softmax head on manual + propagated pools;
/// writes classifier.json.
std::string run_train_classifier(const std::string& features_dir,
                                 const std::string& labels_path,
                                 const std::string& propagated_path,
                                 const PipelineConfig& cfg,
                                 const std::string& out_dir);

/// Classifies every proposal, assembles per-frame prediction masks, and
/// scores them against the PNG+JSON ground truth under gt_dir. Writes
/// report.json, report.txt and per-frame semantic overlays.
struct EvaluateResult {
  MetricsReport instance;
  MetricsReport pixel;
  std::string report_json_path;
};
EvaluateResult run_evaluate(const std::string& manifest_path,
                            const std::string& features_dir,
                            const std::string& classifier_path,
                            const std::string& gt_dir,
                            const std::string& out_dir);

/// Renders every OFF mesh under models_dir to depth views + a JSON
/// manifest per mesh. Returns the number of meshes processed.
std::size_t run_render(const std::string& models_dir,
                       const PipelineConfig& cfg, const std::string& out_dir,
                       int jobs);

struct PipelineOptions {
  std::string frames_dir;
  std::string camera_path;
  std::string labels_path;   // manual seed labels
  std::string gt_dir;
  std::optional<std::string> models_dir;  // enables the render stage
  std::string out_dir;
  int jobs = 1;
};

/// Full run: (render) -> detect -> features -> train-gpc -> propagate ->
/// train-classifier -> evaluate. Writes run_manifest.json; two runs with
/// identical config + seed produce byte-identical manifests and reports.
EvaluateResult run_pipeline(const PipelineOptions& opts,
                            const PipelineConfig& cfg);

}  // namespace wsrd
