#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mslam/sim3.hpp"
#include "mslam/world.hpp"

namespace mslam {

/// Which side of a registration boundary a submap inference serves.
/// Preceding submaps carry a near-field depth bias, succeeding submaps a
/// far-field one; LoopHistorical marks re-inference of a past context.
enum class ContextRole : std::uint8_t { Preceding, Succeeding, LoopHistorical };

const char* to_string(ContextRole role);

/// Corruption model applied on top of ground-truth geometry: one random
/// gauge per submap, depth-proportional point noise, uniform outliers,
/// role-dependent depth bias, rank-consistent confidences and a sky band.
struct CorruptionConfig {
  double gauge_scale_sigma = 0.0;  // std of log-scale
  double gauge_rot_max = 0.0;      // rad; angle drawn uniform in [0, max]
  double gauge_trans_sigma = 0.0;  // m
  double point_noise_rel = 0.0;    // fraction of depth
  double outlier_fraction = 0.0;   // in [0, 0.5)
  double context_bias_beta = 0.0;  // depth bias magnitude
  double confidence_noise = 0.0;   // std of confidence jitter

  void validate() const;
};

/// Per-frame corrupted geometry grid (float32 so the container round-trip
/// is lossless).
struct FrameGeometry {
  int frame_id = -1;
  std::vector<Eigen::Vector3f> points;  // row-major, height*width
  std::vector<float> confidence;
  std::vector<std::uint8_t> sky;
  RigidPose local_pose;  // camera to submap-local
};

/// One submap inference result: point maps, poses, confidences and sky
/// flags for the requested frames, all in the submap-local frame anchored
/// at the first requested frame.
struct SubmapGeometry {
  int submap_id = -1;
  int width = 0;
  int height = 0;
  std::vector<FrameGeometry> frames;
  Sim3 applied_gauge;  // diagnostic: the gauge this inference realized

  const FrameGeometry* find_frame(int frame_id) const;
};

/// A single inference request: ordered frame ids, the submap id that keys
/// the gauge, the context role, and a contamination factor (> 0 only for
/// re-inference of a historical context polluted by injected current
/// frames; scales the prediction noise).
struct GeometryRequest {
  std::vector<int> frames;
  int submap_id = -1;
  ContextRole role = ContextRole::Preceding;
  double contamination = 0.0;
};

/// The seam that isolates the geometry model: any component that maps an
/// ordered frame set to point maps, local poses and confidences can stand
/// behind it.
class GeometryProvider {
 public:
  virtual ~GeometryProvider() = default;
  virtual SubmapGeometry infer(const GeometryRequest& request) = 0;
};

/// Deterministic reference provider: corrupts ground-truth geometry per
/// the corruption config. Same (seed, submap id, role) means the same
/// output; the gauge is keyed by submap id alone so every role of one
/// submap, and every re-inference of a historical frame, shares it.
class SyntheticGeometryProvider : public GeometryProvider {
 public:
  SyntheticGeometryProvider(const GroundTruthWorld& world,
                            const CorruptionConfig& corruption,
                            std::uint64_t seed);

  SubmapGeometry infer(const GeometryRequest& request) override;

  Sim3 gauge_for_submap(int submap_id) const;

 private:
  const GroundTruthWorld& world_;
  CorruptionConfig corruption_;
  std::uint64_t seed_;
};

/// Replays inference results recorded by a previous run. Requests are
/// matched by (submap id, role, contamination flag, frame list).
class ReplayGeometryProvider : public GeometryProvider {
 public:
  /// Loads the manifest written by save_geometry_recording.
  explicit ReplayGeometryProvider(const std::string& directory);

  SubmapGeometry infer(const GeometryRequest& request) override;

 private:
  std::string directory_;
  std::map<std::string, std::string> stems_;  // request key -> file stem
};

/// Wraps a provider and records every result under `directory` so a later
/// run can replay it byte-for-byte.
class RecordingGeometryProvider : public GeometryProvider {
 public:
  RecordingGeometryProvider(GeometryProvider& inner, std::string directory);
  ~RecordingGeometryProvider();

  SubmapGeometry infer(const GeometryRequest& request) override;

 private:
  GeometryProvider& inner_;
  std::string directory_;
  std::vector<std::string> manifest_lines_;
};

/// Stable key identifying a request within a recording.
std::string geometry_request_key(const GeometryRequest& request);

}  // namespace mslam
