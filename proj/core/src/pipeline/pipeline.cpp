#include "wsrd/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wsrd/detect/objectness.hpp"
#include "wsrd/features/features.hpp"
#include "wsrd/geometry/camera.hpp"
#include "wsrd/gpc/gpc.hpp"
#include "wsrd/image/png_io.hpp"
#include "wsrd/io/ply_io.hpp"
#include "wsrd/render/mesh.hpp"
#include "wsrd/render/synth_depth.hpp"

namespace fs = std::filesystem;

namespace wsrd {
namespace {

constexpr int kNormalNeighbors = 10;

std::vector<fs::path> sorted_files(const std::string& dir,
                                   const std::string& ext) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext)
      out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t stable_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Nearest-point z-buffer rasterization of a colored cloud.
void rasterize_frame(const PointCloud& cloud, const CameraModel& camera,
                     RgbImage8& rgb, GrayImage16& depth) {
  rgb = RgbImage8(camera.width(), camera.height(), 0);
  depth = GrayImage16(camera.width(), camera.height(), 0);
  std::vector<double> zbuf(std::size_t(camera.width()) * camera.height(),
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    PixelProjection px;
    try {
      px = project_point(camera, cloud.points[i]);
    } catch (const Error&) {
      continue;
    }
    const int u = int(std::lround(px.u));
    const int v = int(std::lround(px.v));
    if (!rgb.contains(u, v)) continue;
    double& z = zbuf[std::size_t(v) * camera.width() + u];
    if (px.d >= z) continue;
    z = px.d;
    depth.at(u, v) = std::uint16_t(
        std::clamp(std::lround(px.d * 1000.0), 1L, 65535L));
    if (cloud.has_colors())
      for (int c = 0; c < 3; ++c) rgb.at(u, v, c) = cloud.colors[i][c];
  }
}

struct Timer {
  std::string name;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  ~Timer() {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    std::cerr << "[stage " << name << "] " << ms << " ms\n";
  }
};

}  // namespace

DetectResult run_detect(const std::string& frames_dir,
                        const std::string& camera_path,
                        const PipelineConfig& cfg,
                        const std::string& out_dir) {
  Timer timer{"detect"};
  cfg.validate();
  const CameraModel camera = CameraModel::load(camera_path);
  fs::create_directories(fs::path(out_dir) / "masks");
  fs::create_directories(fs::path(out_dir) / "indices");

  DetectResult result;
  nlohmann::json manifest_lines = nlohmann::json::array();
  for (const fs::path& frame_path : sorted_files(frames_dir, ".ply")) {
    const std::string frame_id = frame_path.stem().string();
    ++result.frame_count;

    PointCloud cloud = read_ply(frame_path.string());
    if (!cloud.has_colors())
      throw DataError("frame has no colors: " + frame_path.string());
    cloud = cloud.with_intensity_from_color();
    if (!cloud.has_normals())
      cloud = estimate_normals(cloud, kNormalNeighbors, camera.center());

    const auto planes = remove_planes(cloud, cfg.plane_removal,
                                      cfg.seed ^ stable_hash(frame_id));
    const auto clusters = cluster_proposals(planes.remaining, cfg.clustering);

    int k = 0;
    for (const auto& cluster : clusters) {
      std::vector<std::size_t> original;
      original.reserve(cluster.size());
      for (std::size_t i : cluster)
        original.push_back(planes.remaining_indices[i]);

      ObjectnessProposal prop;
      try {
        prop = proposal_to_mask(original, cloud, camera);
      } catch (const Error&) {
        continue;  // fully off-screen cluster
      }

      ProposalRecord rec;
      rec.id = frame_id + "#" + std::to_string(k);
      rec.frame_id = frame_id;
      rec.mask_path = (fs::path(out_dir) / "masks" /
                       (frame_id + "_" + std::to_string(k) + ".png"))
                          .string();
      rec.indices_path = (fs::path(out_dir) / "indices" /
                          (frame_id + "_" + std::to_string(k) + ".json"))
                             .string();
      rec.u_min = prop.u_min;
      rec.v_min = prop.v_min;
      rec.u_max = prop.u_max;
      rec.v_max = prop.v_max;
      rec.centroid = prop.centroid;

      write_png(rec.mask_path, prop.mask);
      std::ofstream idx(rec.indices_path);
      idx << nlohmann::json(prop.point_indices).dump();

      nlohmann::json line;
      line["id"] = rec.id;
      line["frame"] = rec.frame_id;
      line["mask"] = rec.mask_path;
      line["indices"] = rec.indices_path;
      line["bbox"] = {rec.u_min, rec.v_min, rec.u_max, rec.v_max};
      line["centroid"] = {rec.centroid.x(), rec.centroid.y(),
                          rec.centroid.z()};
      manifest_lines.push_back(line);
      result.proposals.push_back(std::move(rec));
      ++k;
    }
  }

  // Manifest last: a failure above leaves no partial manifest behind.
  result.manifest_path = (fs::path(out_dir) / "proposals.jsonl").string();
  std::ofstream out(result.manifest_path, std::ios::trunc);
  for (const auto& line : manifest_lines) out << line.dump() << '\n';
  return result;
}

std::vector<ProposalRecord> read_proposal_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::vector<ProposalRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    ProposalRecord rec;
    rec.id = j.at("id");
    rec.frame_id = j.at("frame");
    rec.mask_path = j.at("mask");
    rec.indices_path = j.at("indices");
    rec.u_min = j.at("bbox")[0];
    rec.v_min = j.at("bbox")[1];
    rec.u_max = j.at("bbox")[2];
    rec.v_max = j.at("bbox")[3];
    rec.centroid = Point3(j.at("centroid")[0], j.at("centroid")[1],
                          j.at("centroid")[2]);
    out.push_back(std::move(rec));
  }
  return out;
}

void run_features(const std::string& frames_dir,
                  const std::string& camera_path,
                  const std::string& manifest_path,
                  const std::string& out_dir) {
  Timer timer{"features"};
  const CameraModel camera = CameraModel::load(camera_path);
  const auto proposals = read_proposal_manifest(manifest_path);
  fs::create_directories(out_dir);

  // Rasterize each frame once.
  std::map<std::string, std::pair<RgbImage8, GrayImage16>> frames;
  for (const auto& rec : proposals) {
    if (frames.count(rec.frame_id)) continue;
    const fs::path ply = fs::path(frames_dir) / (rec.frame_id + ".ply");
    const PointCloud cloud = read_ply(ply.string());
    auto& [rgb, depth] = frames[rec.frame_id];
    rasterize_frame(cloud, camera, rgb, depth);
  }

  FeatureMatrix rgb_matrix, depth_matrix;
  for (const auto& rec : proposals) {
    const auto& [rgb, depth] = frames.at(rec.frame_id);
    const int w = rec.u_max - rec.u_min + 1;
    const int h = rec.v_max - rec.v_min + 1;
    RgbImage8 rgb_crop(w, h, 0);
    GrayImage16 depth_crop(w, h, 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c)
          rgb_crop.at(x, y, c) = rgb.at(rec.u_min + x, rec.v_min + y, c);
        depth_crop.at(x, y) = depth.at(rec.u_min + x, rec.v_min + y);
      }

    const FeatureVector fr = extract_rgb_features(rgb_crop);
    const FeatureVector fd = extract_depth_features(depth_crop);
    rgb_matrix.ids.push_back(rec.id);
    depth_matrix.ids.push_back(rec.id);
    rgb_matrix.rows.conservativeResize(Eigen::Index(rgb_matrix.ids.size()),
                                       fr.dimension());
    rgb_matrix.rows.row(Eigen::Index(rgb_matrix.ids.size()) - 1) = fr.values;
    depth_matrix.rows.conservativeResize(
        Eigen::Index(depth_matrix.ids.size()), fd.dimension());
    depth_matrix.rows.row(Eigen::Index(depth_matrix.ids.size()) - 1) =
        fd.values;
  }
  save_feature_matrix((fs::path(out_dir) / "features_rgb.csv").string(),
                      rgb_matrix);
  save_feature_matrix((fs::path(out_dir) / "features_depth.csv").string(),
                      depth_matrix);
}

std::vector<LabelRow> read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels: " + path);
  std::vector<LabelRow> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("id,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string id, label, prov, conf;
    if (!std::getline(ls, id, ',') || !std::getline(ls, label, ',') ||
        !std::getline(ls, prov, ',') || !std::getline(ls, conf, ','))
      throw DataError("bad label row: " + line);
    LabelRow row;
    row.id = id;
    row.label = std::stoi(label);
    if (prov == "manual")
      row.provenance = Provenance::Manual;
    else if (prov == "propagated")
      row.provenance = Provenance::Propagated;
    else
      throw DataError("unknown provenance: " + prov);
    row.confidence = std::stod(conf);
    out.push_back(std::move(row));
  }
  return out;
}

void write_labels_csv(const std::string& path,
                      const std::vector<LabelRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write labels: " + path);
  out << "id,label,provenance,confidence\n";
  out.precision(17);
  for (const auto& row : rows)
    out << row.id << ',' << row.label << ','
        << (row.provenance == Provenance::Manual ? "manual" : "propagated")
        << ',' << row.confidence << '\n';
}

FusedFeatures load_fused_features(const std::string& features_dir) {
  const FeatureMatrix rgb = load_feature_matrix(
      (fs::path(features_dir) / "features_rgb.csv").string());
  const FeatureMatrix depth = load_feature_matrix(
      (fs::path(features_dir) / "features_depth.csv").string());
  if (rgb.ids != depth.ids)
    throw DataError("rgb/depth feature ids disagree");
  FusedFeatures fused;
  fused.ids = rgb.ids;
  fused.split = int(rgb.rows.cols());
  fused.X.resize(rgb.rows.rows(), rgb.rows.cols() + depth.rows.cols());
  fused.X << rgb.rows, depth.rows;
  return fused;
}

std::map<int, std::string> run_train_gpc(const std::string& features_dir,
                                         const std::string& labels_path,
                                         const PipelineConfig& cfg,
                                         const std::string& out_dir) {
  Timer timer{"train-gpc"};
  const FusedFeatures fused = load_fused_features(features_dir);
  const auto labels = read_labels_csv(labels_path);
  fs::create_directories(out_dir);

  std::map<std::string, Eigen::Index> row_of;
  for (Eigen::Index i = 0; i < Eigen::Index(fused.ids.size()); ++i)
    row_of[fused.ids[std::size_t(i)]] = i;

  std::set<int> categories;
  for (const auto& row : labels) categories.insert(row.label);
  if (categories.size() < 2)
    throw DataError("need labels from at least 2 categories");

  const EpConfig ep{cfg.gpc.tol, cfg.gpc.max_sweeps, 0.8};
  std::map<int, std::string> model_paths;
  for (int cat : categories) {
    TrainingSet ts;
    ts.split = fused.split;
    ts.X.resize(Eigen::Index(labels.size()), fused.X.cols());
    ts.y.resize(Eigen::Index(labels.size()));
    Eigen::Index n = 0;
    for (const auto& row : labels) {
      auto it = row_of.find(row.id);
      if (it == row_of.end())
        throw DataError("label id without features: " + row.id);
      ts.X.row(n) = fused.X.row(it->second);
      ts.y[n] = row.label == cat ? 1 : -1;
      ++n;
    }

    const OptimizeResult opt = optimize_hyperparams(
        ts, KernelHyperparams{}, cfg.gpc.restarts,
        cfg.seed + std::uint64_t(cat), ep);
    const std::string path =
        (fs::path(out_dir) / ("gpc_" + std::to_string(cat) + ".json"))
            .string();
    opt.model.save(path);
    model_paths[cat] = path;
  }
  return model_paths;
}

PropagationResult run_propagate(const std::string& features_dir,
                                const std::string& labels_path,
                                const std::string& models_dir,
                                const PipelineConfig& cfg,
                                const std::string& out_dir) {
  Timer timer{"propagate"};
  const FusedFeatures fused = load_fused_features(features_dir);
  const auto manual = read_labels_csv(labels_path);
  fs::create_directories(out_dir);

  std::set<std::string> manual_ids;
  for (const auto& row : manual) manual_ids.insert(row.id);

  std::vector<int> categories;
  std::vector<GpcModel> models;
  for (const fs::path& path : sorted_files(models_dir, ".json")) {
    const std::string stem = path.stem().string();
    if (stem.rfind("gpc_", 0) != 0) continue;
    categories.push_back(std::stoi(stem.substr(4)));
    models.push_back(GpcModel::load(path.string()));
  }
  if (models.empty()) throw DataError("no gpc models in " + models_dir);

  std::vector<std::string> pool_ids;
  std::vector<Eigen::Index> pool_rows;
  for (Eigen::Index i = 0; i < Eigen::Index(fused.ids.size()); ++i) {
    if (manual_ids.count(fused.ids[std::size_t(i)])) continue;
    pool_ids.push_back(fused.ids[std::size_t(i)]);
    pool_rows.push_back(i);
  }
  Eigen::MatrixXd pool(Eigen::Index(pool_rows.size()), fused.X.cols());
  for (Eigen::Index i = 0; i < pool.rows(); ++i)
    pool.row(i) = fused.X.row(pool_rows[std::size_t(i)]);

  PropagationResult result =
      propagate_labels(models, pool_ids, pool, cfg.propagation);

  // Model indices back to category ids.
  PropagationResult remapped;
  for (auto& ex : result.examples) {
    ex.label = categories[std::size_t(ex.label)];
    remapped.examples.push_back(std::move(ex));
  }
  for (const auto& [idx, stats] : result.per_category)
    remapped.per_category[categories[std::size_t(idx)]] = stats;

  std::vector<LabelRow> rows;
  for (const auto& ex : remapped.examples)
    rows.push_back({ex.id, ex.label, Provenance::Propagated, ex.confidence});
  write_labels_csv((fs::path(out_dir) / "propagated.csv").string(), rows);

  nlohmann::json report;
  report["version"] = 1;
  for (const auto& [cat, stats] : remapped.per_category)
    report["per_category"][std::to_string(cat)] = {
        {"unlabeled_count", stats.unlabeled_count},
        {"propagated_count", stats.propagated_count},
        {"abandoned_count", stats.abandoned_count}};
  std::ofstream rep((fs::path(out_dir) / "propagation_report.json").string());
  rep << report.dump(2) << '\n';
  return remapped;
}

namespace {

std::vector<LabeledExample> examples_from_rows(
    const std::vector<LabelRow>& rows, const FusedFeatures& fused) {
  std::map<std::string, Eigen::Index> row_of;
  for (Eigen::Index i = 0; i < Eigen::Index(fused.ids.size()); ++i)
    row_of[fused.ids[std::size_t(i)]] = i;
  std::vector<LabeledExample> out;
  for (const auto& row : rows) {
    auto it = row_of.find(row.id);
    if (it == row_of.end())
      throw DataError("label id without features: " + row.id);
    out.push_back({row.id, fused.X.row(it->second).transpose(), row.label,
                   row.provenance, row.confidence});
  }
  return out;
}

}  // namespace

std::string run_train_classifier(const std::string& features_dir,
                                 const std::string& labels_path,
                                 const std::string& propagated_path,
                                 const PipelineConfig& cfg,
                                 const std::string& out_dir) {
  Timer timer{"train-classifier"};
  const FusedFeatures fused = load_fused_features(features_dir);
  const auto manual_rows = read_labels_csv(labels_path);
  const auto propagated_rows = read_labels_csv(propagated_path);
  fs::create_directories(out_dir);

  int num_classes = 0;
  for (const auto& row : manual_rows)
    num_classes = std::max(num_classes, row.label + 1);
  for (const auto& row : propagated_rows)
    num_classes = std::max(num_classes, row.label + 1);

  TrainOptions opts = cfg.training;
  opts.seed = cfg.seed;
  const LinearSoftmaxModel model = train_weighted_classifier(
      examples_from_rows(manual_rows, fused),
      examples_from_rows(propagated_rows, fused), num_classes, opts);
  const std::string path = (fs::path(out_dir) / "classifier.json").string();
  model.save(path);
  return path;
}

EvaluateResult run_evaluate(const std::string& manifest_path,
                            const std::string& features_dir,
                            const std::string& classifier_path,
                            const std::string& gt_dir,
                            const std::string& out_dir) {
  Timer timer{"evaluate"};
  const auto proposals = read_proposal_manifest(manifest_path);
  const FusedFeatures fused = load_fused_features(features_dir);
  const LinearSoftmaxModel model = LinearSoftmaxModel::load(classifier_path);
  fs::create_directories(fs::path(out_dir) / "semantic");

  std::map<std::string, Eigen::Index> row_of;
  for (Eigen::Index i = 0; i < Eigen::Index(fused.ids.size()); ++i)
    row_of[fused.ids[std::size_t(i)]] = i;

  std::map<std::string, AnnotatedFrame> frames;
  for (const auto& rec : proposals) {
    auto it = row_of.find(rec.id);
    if (it == row_of.end())
      throw DataError("proposal without features: " + rec.id);
    const auto [category, probs] =
        predict_class(model, fused.X.row(it->second).transpose());
    AnnotatedFrame& frame = frames[rec.frame_id];
    frame.frame_id = rec.frame_id;
    frame.predictions.push_back({category, read_png_gray8(rec.mask_path)});
  }

  if (fs::is_directory(gt_dir)) {
    for (const auto& entry : fs::directory_iterator(gt_dir)) {
      if (!entry.is_directory()) continue;
      const std::string frame_id = entry.path().filename().string();
      const fs::path index = entry.path() / "index.json";
      if (!fs::exists(index)) continue;
      std::ifstream in(index);
      const nlohmann::json j = nlohmann::json::parse(in);
      AnnotatedFrame& frame = frames[frame_id];
      frame.frame_id = frame_id;
      for (const auto& item : j) {
        const std::string file = item.at("file");
        frame.ground_truth.push_back(
            {item.at("category"),
             read_png_gray8((entry.path() / file).string())});
      }
    }
  }

  std::vector<AnnotatedFrame> frame_list;
  for (auto& [id, frame] : frames) frame_list.push_back(std::move(frame));
  if (frame_list.empty()) throw DataError("nothing to evaluate");

  // Semantic overlays, one color per category.
  static constexpr std::array<Color, 8> palette = {
      Color{230, 25, 75}, Color{60, 180, 75}, Color{255, 225, 25},
      Color{0, 130, 200}, Color{245, 130, 48}, Color{145, 30, 180},
      Color{70, 240, 240}, Color{240, 50, 230}};
  for (const auto& frame : frame_list) {
    if (frame.predictions.empty()) continue;
    const auto& first = frame.predictions.front().mask;
    RgbImage8 overlay(first.width, first.height, 0);
    for (const auto& pred : frame.predictions) {
      const Color& color = palette[std::size_t(pred.category) % palette.size()];
      for (int y = 0; y < pred.mask.height; ++y)
        for (int x = 0; x < pred.mask.width; ++x)
          if (pred.mask.at(x, y))
            for (int c = 0; c < 3; ++c) overlay.at(x, y, c) = color[c];
    }
    write_png(
        (fs::path(out_dir) / "semantic" / (frame.frame_id + ".png")).string(),
        overlay);
  }

  EvaluateResult result;
  result.instance = instance_metrics(frame_list);
  result.pixel = pixel_metrics(frame_list);
  result.report_json_path = (fs::path(out_dir) / "report.json").string();
  std::ofstream json_out(result.report_json_path, std::ios::trunc);
  json_out << report_to_json(result.instance, result.pixel) << '\n';
  std::ofstream table_out((fs::path(out_dir) / "report.txt").string(),
                          std::ios::trunc);
  table_out << report_to_table(result.instance, result.pixel);
  return result;
}

std::size_t run_render(const std::string& models_dir,
                       const PipelineConfig& cfg, const std::string& out_dir,
                       int jobs) {
  Timer timer{"render"};
  cfg.validate();
  std::size_t count = 0;
  for (const fs::path& mesh_path : sorted_files(models_dir, ".off")) {
    const std::string model_id = mesh_path.stem().string();
    const TriangleMesh mesh = read_off(mesh_path.string());
    const auto views = render_views(mesh, cfg.render, cfg.seed, jobs);

    const fs::path model_dir = fs::path(out_dir) / model_id;
    fs::create_directories(model_dir);
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["model"] = model_id;
    manifest["views"] = nlohmann::json::array();
    for (std::size_t v = 0; v < views.size(); ++v) {
      char name[32];
      std::snprintf(name, sizeof(name), "view_%03zu.png", v);
      const fs::path png_path = model_dir / name;
      write_png(png_path.string(), views[v].depth);
      const fs::path cam_path = model_dir / (std::string(name) + ".cam");
      views[v].camera.save(cam_path.string());
      manifest["views"].push_back(
          {{"depth", png_path.string()}, {"camera", cam_path.string()}});
    }
    std::ofstream mf((model_dir / "manifest.json").string());
    mf << manifest.dump(2) << '\n';
    ++count;
  }
  return count;
}

namespace {

// Stage failures surface with the stage name, preserving the error type.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

}  // namespace

EvaluateResult run_pipeline(const PipelineOptions& opts,
                            const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["config_hash"] = cfg.config_hash();
  manifest["seed"] = cfg.seed;

  if (opts.models_dir) {
    const std::size_t meshes = stage("render", [&] {
      return run_render(*opts.models_dir, cfg, (out / "render").string(),
                        opts.jobs);
    });
    manifest["stages"]["render"] = {{"meshes", meshes},
                                    {"out", (out / "render").string()}};
  }

  const DetectResult detect = stage("detect", [&] {
    return run_detect(opts.frames_dir, opts.camera_path, cfg,
                      (out / "detect").string());
  });
  manifest["stages"]["detect"] = {{"frames", detect.frame_count},
                                  {"proposals", detect.proposals.size()},
                                  {"manifest", detect.manifest_path}};

  stage("features", [&] {
    run_features(opts.frames_dir, opts.camera_path, detect.manifest_path,
                 (out / "features").string());
  });
  manifest["stages"]["features"] = {{"rows", detect.proposals.size()},
                                    {"out", (out / "features").string()}};

  const auto model_paths = stage("train-gpc", [&] {
    return run_train_gpc((out / "features").string(), opts.labels_path, cfg,
                         (out / "models").string());
  });
  manifest["stages"]["train_gpc"]["categories"] = nlohmann::json::array();
  for (const auto& [cat, path] : model_paths)
    manifest["stages"]["train_gpc"]["categories"].push_back(cat);

  const PropagationResult prop = stage("propagate", [&] {
    return run_propagate((out / "features").string(), opts.labels_path,
                         (out / "models").string(), cfg,
                         (out / "propagate").string());
  });
  manifest["stages"]["propagate"] = {
      {"propagated", prop.examples.size()},
      {"report", (out / "propagate" / "propagation_report.json").string()}};

  const std::string classifier_path = stage("train-classifier", [&] {
    return run_train_classifier(
        (out / "features").string(), opts.labels_path,
        (out / "propagate" / "propagated.csv").string(), cfg,
        (out / "classifier").string());
  });
  manifest["stages"]["train_classifier"] = {{"model", classifier_path}};

  const EvaluateResult eval = stage("evaluate", [&] {
    return run_evaluate(detect.manifest_path, (out / "features").string(),
                        classifier_path, opts.gt_dir,
                        (out / "eval").string());
  });
  manifest["stages"]["evaluate"] = {
      {"report", eval.report_json_path},
      {"instance_f", eval.instance.overall.f_score},
      {"pixel_f", eval.pixel.overall.f_score}};

  std::ofstream mf((out / "run_manifest.json").string(), std::ios::trunc);
  mf << manifest.dump(2) << '\n';
  return eval;
}

}  // namespace wsrd
