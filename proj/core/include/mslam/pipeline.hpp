#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mslam/config.hpp"
#include "mslam/geometry_provider.hpp"
#include "mslam/metrics.hpp"
#include "mslam/motion.hpp"
#include "mslam/partition.hpp"
#include "mslam/posegraph.hpp"
#include "mslam/registration.hpp"
#include "mslam/trajectory.hpp"
#include "mslam/world.hpp"

namespace mslam {

enum class PipelineMode { Synthetic, Replay };
enum class LoopMode { Unidirectional, Bidirectional, Off };

struct RegistrationConfig {
  double tau_conf = 0.5;   // confidence quantile for the valid mask
  double tau_in = 0.5;     // inlier-ratio acceptance threshold
  int anchor_window = 3;   // frames around the overlap midpoint
  int max_iters = 20;
  HuberDeltaMode huber_mode = HuberDeltaMode::MadScaled;
  double huber_fixed_delta = 1.0;  // meters; used only in fixed mode
};

/// Full pipeline configuration. Defaults carry the fixed benchmark
/// thresholds; see the key registry in pipeline.cpp for the file keys.
struct PipelineConfig {
  PipelineMode mode = PipelineMode::Synthetic;
  LoopMode loop_mode = LoopMode::Unidirectional;
  std::uint64_t seed = 1;

  WorldConfig world;            // synthetic mode
  CorruptionConfig corruption;  // synthetic mode

  std::string replay_dir;             // replay mode input bundle
  std::string reference_trajectory;   // optional ground truth for metrics
  double replay_frame_dt = 0.1;

  MotionParams motion;
  PartitionParams partition;
  RegistrationConfig registration;
  LmParams lm;

  /// Extra prediction-noise factor applied when a historical context is
  /// re-inferred with injected current frames (Bidirectional mode only).
  double bi_contamination = 1.0;

  int workers = 1;
  std::string out_dir = "out";
  TrajectoryFormat output_format = TrajectoryFormat::TUM;
  bool record_geometry = false;  // write a replay bundle while running
};

/// Parses a pipeline config from key-value text, rejecting unknown keys.
PipelineConfig parse_pipeline_config(const KeyValueConfig& kv);

/// Parses the trajectory primitive list DSL:
/// `straight:<meters>:<frames>,arc:<radius>:<sweep_rad>:<frames>,stop:<frames>`.
std::vector<TrajectoryPrimitive> parse_trajectory_spec(const std::string& spec);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineReport {
  std::vector<StageTiming> stage_times;
  std::size_t frame_count = 0;
  std::size_t keyframe_count = 0;
  std::size_t submap_count = 0;
  std::size_t edges_total = 0;
  std::size_t edges_accepted = 0;
  std::size_t edges_rejected = 0;
  std::optional<MetricReport> metrics;
  OptimizeReport optimize;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
};

std::string format_pipeline_report(const PipelineReport& report);

/// Runs the staged pipeline end to end and writes the artifacts into
/// config.out_dir. Any stage error aborts with a stage-tagged diagnostic;
/// artifacts already written are renamed with a `.partial` suffix.
PipelineReport run_pipeline(const PipelineConfig& config);

/// Stage-1 debug: motion analysis plus partitioning only; returns the
/// partition report CSV content and writes it when out_path is non-empty.
std::string run_partition_stage(const PipelineConfig& config,
                                const std::string& out_path = "");

}  // namespace mslam
