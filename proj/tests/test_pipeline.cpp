#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "wsrd/pipeline/pipeline.hpp"

using namespace wsrd;
using namespace wsrd::testing;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config files parse, reject unknowns, and hash stably") {
  const std::string text =
      "seed = 42\n"
      "\n"
      "[clustering]\n"
      "sigma_d = 0.03\n"
      "\n"
      "[propagation]\n"
      "tau = 0.8\n"
      "conflict_policy = highest-confidence\n";
  const PipelineConfig cfg = PipelineConfig::parse(text);
  CHECK(cfg.seed == 42);
  CHECK(cfg.clustering.sigma_d == 0.03);
  CHECK(cfg.propagation.tau == 0.8);
  CHECK(cfg.propagation.conflict_policy == ConflictPolicy::HighestConfidence);
  // Untouched keys keep their defaults.
  CHECK(cfg.clustering.sigma_c == 8.0);
  CHECK(cfg.render.output_size == 224);

  // The canonical serialization round-trips and hashes deterministically.
  const PipelineConfig back = PipelineConfig::parse(cfg.serialize());
  CHECK(back.serialize() == cfg.serialize());
  CHECK(back.config_hash() == cfg.config_hash());
  CHECK(cfg.config_hash() != PipelineConfig{}.config_hash());

  CHECK_THROWS_AS(PipelineConfig::parse("[nonsense]\n"), Error);
  CHECK_THROWS_AS(PipelineConfig::parse("[clustering]\nwidth = 3\n"), Error);
  CHECK_THROWS_AS(PipelineConfig::parse("sigma_d = 1\n"), Error);  // top level
  CHECK_THROWS_WITH_AS(PipelineConfig::parse("[propagation]\ntau = 1.01\n"),
                       "tau must be in (0.5, 1]", Error);
  CHECK_THROWS_AS(PipelineConfig::parse("[gpc]\ntol = banana\n"), Error);
}

TEST_CASE("detect finds each object of a synthetic scene") {
  const fs::path root = fresh_dir("wsrd_detect_fixture");
  const PipelineFixture fx = write_pipeline_fixture(root.string(), {500}, 3);

  const fs::path out = root / "out";
  const DetectResult result =
      run_detect(fx.frames_dir, fx.camera_path, PipelineConfig{},
                 out.string());
  CHECK(result.frame_count == 1);
  REQUIRE(result.proposals.size() == 3);
  for (const auto& rec : result.proposals) {
    CHECK(rec.frame_id == "frame_000");
    CHECK(fs::exists(rec.mask_path));
    CHECK(fs::exists(rec.indices_path));
    CHECK(rec.u_min <= rec.u_max);
  }
  // Manifest round-trip.
  const auto records = read_proposal_manifest(result.manifest_path);
  REQUIRE(records.size() == 3);
  CHECK(records[0].id == result.proposals[0].id);
  CHECK((records[1].centroid - result.proposals[1].centroid).norm() < 1e-12);
  fs::remove_all(root);
}

TEST_CASE("detect on an empty directory yields an empty manifest") {
  const fs::path root = fresh_dir("wsrd_detect_empty");
  fs::create_directories(root / "frames");
  const SyntheticScene scene = make_scene(1, 1);
  scene.camera.save((root / "camera.txt").string());

  const DetectResult result =
      run_detect((root / "frames").string(), (root / "camera.txt").string(),
                 PipelineConfig{}, (root / "out").string());
  CHECK(result.frame_count == 0);
  CHECK(result.proposals.empty());
  CHECK(fs::exists(result.manifest_path));
  std::ifstream in(result.manifest_path);
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  CHECK(contents.empty());
  fs::remove_all(root);
}

TEST_CASE("a corrupt frame aborts detect before the manifest is written") {
  const fs::path root = fresh_dir("wsrd_detect_corrupt");
  const PipelineFixture fx = write_pipeline_fixture(root.string(), {501}, 2);
  {
    std::ofstream bad(fs::path(fx.frames_dir) / "frame_999.ply");
    bad << "ply\nformat ascii 1.0\nelement vertex banana\n";
  }
  const fs::path out = root / "out";
  CHECK_THROWS_AS(run_detect(fx.frames_dir, fx.camera_path, PipelineConfig{},
                             out.string()),
                  DataError);
  CHECK_FALSE(fs::exists(out / "proposals.jsonl"));
  fs::remove_all(root);
}

TEST_CASE("labels csv round-trips and rejects junk") {
  const fs::path root = fresh_dir("wsrd_labels");
  const std::vector<LabelRow> rows = {
      {"frame_000#0", 0, Provenance::Manual, 1.0},
      {"frame_000#1", 1, Provenance::Propagated, 0.875}};
  const std::string path = (root / "labels.csv").string();
  write_labels_csv(path, rows);
  const auto back = read_labels_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == rows[0].id);
  CHECK(back[1].label == 1);
  CHECK(back[1].provenance == Provenance::Propagated);
  CHECK(back[1].confidence == 0.875);

  {
    std::ofstream bad(root / "bad.csv");
    bad << "id,label,provenance,confidence\nx,0,oracle,1.0\n";
  }
  CHECK_THROWS_AS(read_labels_csv((root / "bad.csv").string()), DataError);
  fs::remove_all(root);
}

TEST_CASE("the feature stage emits aligned rgb and depth matrices") {
  const fs::path root = fresh_dir("wsrd_feature_stage");
  const PipelineFixture fx = write_pipeline_fixture(root.string(), {502}, 2);
  const fs::path out = root / "out";
  const DetectResult det = run_detect(fx.frames_dir, fx.camera_path,
                                      PipelineConfig{}, out.string());
  REQUIRE_FALSE(det.proposals.empty());
  run_features(fx.frames_dir, fx.camera_path, det.manifest_path,
               (out / "features").string());

  const FusedFeatures fused =
      load_fused_features((out / "features").string());
  CHECK(fused.ids.size() == det.proposals.size());
  CHECK(fused.split == 56);
  CHECK(fused.X.cols() == 56 + 32);
  CHECK(fused.X.allFinite());
  // Re-running the stage overwrites to identical bytes.
  std::ifstream f1((out / "features" / "features_rgb.csv"));
  std::string before((std::istreambuf_iterator<char>(f1)),
                     std::istreambuf_iterator<char>());
  f1.close();
  run_features(fx.frames_dir, fx.camera_path, det.manifest_path,
               (out / "features").string());
  std::ifstream f2((out / "features" / "features_rgb.csv"));
  std::string after((std::istreambuf_iterator<char>(f2)),
                    std::istreambuf_iterator<char>());
  CHECK(before == after);
  fs::remove_all(root);
}
