#pragma once

#include <cstdint>
#include <string>

#include "wsrd/detect/objectness.hpp"
#include "wsrd/gpc/gpc.hpp"
#include "wsrd/learn/propagate_train.hpp"
#include "wsrd/render/synth_depth.hpp"

namespace wsrd {

struct GpcStageConfig {
  double tol = 1e-6;
  int max_sweeps = 100;
  int restarts = 5;

  void validate() const {
    if (tol <= 0 || max_sweeps <= 0 || restarts <= 0)
      throw Error("invalid gpc config");
  }
};

/// Declarative run configuration shared by every subcommand. Parsed from
/// an INI-style key=value file; unknown sections or keys are rejected.
struct PipelineConfig {
  ClusteringParams clustering;
  PlaneRemovalParams plane_removal;
  RenderConfig render;
  GpcStageConfig gpc;
  PropagationConfig propagation;
  TrainOptions training;
  std::uint64_t seed = 0;

  void validate() const;

  static PipelineConfig load(const std::string& path);
  static PipelineConfig parse(const std::string& text);

  /// Canonical serialization; also the input of config_hash().
  std::string serialize() const;

  /// FNV-1a over the canonical serialization, as a hex string.
  std::string config_hash() const;
};

}  // namespace wsrd
