// Command-line front end: every pipeline stage as a subcommand plus the
// end-to-end `pipeline` runner. Exit codes: 0 success, 1 usage or config
// validation, 2 data error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wsrd/pipeline/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_jobs = false) {
  cmd->add_option("--config", args.config_path, "run configuration file");
  cmd->add_option("--seed", args.seed, "override the config seed");
  if (with_jobs)
    cmd->add_option("--jobs", args.jobs, "worker threads for fan-out stages")
        ->check(CLI::PositiveNumber);
}

wsrd::PipelineConfig resolve_config(const CommonArgs& args) {
  wsrd::PipelineConfig cfg;
  if (!args.config_path.empty())
    cfg = wsrd::PipelineConfig::load(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly-supervised RGBD object detection pipeline"};
  app.require_subcommand(1);

  struct {
    CommonArgs common;
    std::string models, out;
  } render;
  {
    auto* cmd = app.add_subcommand("render", "depth views from CAD meshes");
    cmd->add_option("--models", render.models, "directory of OFF meshes")
        ->required();
    cmd->add_option("--out", render.out, "output directory")->required();
    add_common(cmd, render.common, true);
  }

  struct {
    CommonArgs common;
    std::string frames, camera, out;
  } detect;
  {
    auto* cmd = app.add_subcommand("detect", "3D objectness proposals");
    cmd->add_option("--frames", detect.frames, "directory of PLY frames")
        ->required();
    cmd->add_option("--camera", detect.camera, "camera config")->required();
    cmd->add_option("--out", detect.out, "output directory")->required();
    add_common(cmd, detect.common);
  }

  struct {
    CommonArgs common;
    std::string frames, camera, manifest, out;
  } features;
  {
    auto* cmd = app.add_subcommand("features", "per-proposal descriptors");
    cmd->add_option("--frames", features.frames, "directory of PLY frames")
        ->required();
    cmd->add_option("--camera", features.camera, "camera config")->required();
    cmd->add_option("--manifest", features.manifest, "proposals.jsonl")
        ->required();
    cmd->add_option("--out", features.out, "output directory")->required();
    add_common(cmd, features.common);
  }

  struct {
    CommonArgs common;
    std::string features_dir, labels, out;
  } train_gpc;
  {
    auto* cmd = app.add_subcommand("train-gpc", "per-category GP classifiers");
    cmd->add_option("--features", train_gpc.features_dir, "features directory")
        ->required();
    cmd->add_option("--labels", train_gpc.labels, "manual labels CSV")
        ->required();
    cmd->add_option("--out", train_gpc.out, "output directory")->required();
    add_common(cmd, train_gpc.common);
  }

  struct {
    CommonArgs common;
    std::string features_dir, labels, models, out;
  } propagate;
  {
    auto* cmd =
        app.add_subcommand("propagate", "confidence-gated label propagation");
    cmd->add_option("--features", propagate.features_dir, "features directory")
        ->required();
    cmd->add_option("--labels", propagate.labels, "manual labels CSV")
        ->required();
    cmd->add_option("--models", propagate.models, "GP model directory")
        ->required();
    cmd->add_option("--out", propagate.out, "output directory")->required();
    add_common(cmd, propagate.common);
  }

  struct {
    CommonArgs common;
    std::string features_dir, labels, propagated, out;
  } train_cls;
  {
    auto* cmd = app.add_subcommand("train-classifier",
                                   "weighted softmax classifier");
    cmd->add_option("--features", train_cls.features_dir, "features directory")
        ->required();
    cmd->add_option("--labels", train_cls.labels, "manual labels CSV")
        ->required();
    cmd->add_option("--propagated", train_cls.propagated, "propagated CSV")
        ->required();
    cmd->add_option("--out", train_cls.out, "output directory")->required();
    add_common(cmd, train_cls.common);
  }

  struct {
    CommonArgs common;
    std::string manifest, features_dir, classifier, gt, out;
  } evaluate;
  {
    auto* cmd = app.add_subcommand("evaluate", "instance + pixel metrics");
    cmd->add_option("--manifest", evaluate.manifest, "proposals.jsonl")
        ->required();
    cmd->add_option("--features", evaluate.features_dir, "features directory")
        ->required();
    cmd->add_option("--classifier", evaluate.classifier, "classifier.json")
        ->required();
    cmd->add_option("--gt", evaluate.gt, "ground-truth directory")->required();
    cmd->add_option("--out", evaluate.out, "output directory")->required();
    add_common(cmd, evaluate.common);
  }

  struct {
    CommonArgs common;
    wsrd::PipelineOptions opts;
    std::string models;
  } pipeline;
  {
    auto* cmd = app.add_subcommand("pipeline", "full end-to-end run");
    cmd->add_option("--frames", pipeline.opts.frames_dir,
                    "directory of PLY frames")
        ->required();
    cmd->add_option("--camera", pipeline.opts.camera_path, "camera config")
        ->required();
    cmd->add_option("--labels", pipeline.opts.labels_path,
                    "manual labels CSV")
        ->required();
    cmd->add_option("--gt", pipeline.opts.gt_dir, "ground-truth directory")
        ->required();
    cmd->add_option("--models", pipeline.models,
                    "OFF mesh directory (enables the render stage)");
    cmd->add_option("--out", pipeline.opts.out_dir, "output directory")
        ->required();
    add_common(cmd, pipeline.common, true);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (app.got_subcommand("render")) {
      const auto cfg = resolve_config(render.common);
      const std::size_t n =
          wsrd::run_render(render.models, cfg, render.out,
                           render.common.jobs);
      std::cerr << "rendered " << n << " meshes\n";
    } else if (app.got_subcommand("detect")) {
      const auto cfg = resolve_config(detect.common);
      const auto result =
          wsrd::run_detect(detect.frames, detect.camera, cfg, detect.out);
      std::cerr << result.proposals.size() << " proposals from "
                << result.frame_count << " frames\n";
    } else if (app.got_subcommand("features")) {
      wsrd::run_features(features.frames, features.camera, features.manifest,
                         features.out);
    } else if (app.got_subcommand("train-gpc")) {
      const auto cfg = resolve_config(train_gpc.common);
      const auto models = wsrd::run_train_gpc(
          train_gpc.features_dir, train_gpc.labels, cfg, train_gpc.out);
      std::cerr << "trained " << models.size() << " category models\n";
    } else if (app.got_subcommand("propagate")) {
      const auto cfg = resolve_config(propagate.common);
      const auto result =
          wsrd::run_propagate(propagate.features_dir, propagate.labels,
                              propagate.models, cfg, propagate.out);
      std::cerr << "propagated " << result.examples.size() << " labels\n";
    } else if (app.got_subcommand("train-classifier")) {
      const auto cfg = resolve_config(train_cls.common);
      wsrd::run_train_classifier(train_cls.features_dir, train_cls.labels,
                                 train_cls.propagated, cfg, train_cls.out);
    } else if (app.got_subcommand("evaluate")) {
      const auto result =
          wsrd::run_evaluate(evaluate.manifest, evaluate.features_dir,
                             evaluate.classifier, evaluate.gt, evaluate.out);
      std::cerr << "instance F " << result.instance.overall.f_score
                << ", pixel F " << result.pixel.overall.f_score << '\n';
    } else if (app.got_subcommand("pipeline")) {
      const auto cfg = resolve_config(pipeline.common);
      pipeline.opts.jobs = pipeline.common.jobs;
      if (!pipeline.models.empty()) pipeline.opts.models_dir = pipeline.models;
      const auto result = wsrd::run_pipeline(pipeline.opts, cfg);
      std::cerr << "instance F " << result.instance.overall.f_score
                << ", pixel F " << result.pixel.overall.f_score << '\n';
    }
  } catch (const wsrd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const wsrd::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const wsrd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
