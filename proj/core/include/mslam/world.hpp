#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mslam/motion.hpp"
#include "mslam/sim3.hpp"

namespace mslam {

/// Trajectory primitives integrated into a continuous planar pose
/// sequence. Poses are sampled at the end of each frame interval, so a
/// straight segment of L meters over N frames advances exactly L/N per
/// frame and the next primitive continues seamlessly.
struct StraightSegment {
  double length_m = 0.0;
  int frames = 0;
};
struct ArcSegment {
  double radius_m = 0.0;
  double sweep_rad = 0.0;  // positive turns left
  int frames = 0;
};
struct Stop {
  int frames = 0;
};
using TrajectoryPrimitive = std::variant<StraightSegment, ArcSegment, Stop>;

/// Deterministic synthetic world: identical seed and config produce a
/// bit-identical world.
struct WorldConfig {
  std::uint64_t seed = 0;
  std::vector<TrajectoryPrimitive> trajectory;
  int image_width = 64;
  int image_height = 48;
  double depth_min_m = 4.0;
  double depth_max_m = 30.0;
  int sky_band_rows = 6;
  double frame_dt = 0.1;   // seconds between frames
  double tau_flow = 0.7;   // px; used for the static_ratio_raw statistic
};

/// Per-frame grid of ground-truth 3D points in world coordinates.
struct PointGridD {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> points;  // row-major, height*width

  const Eigen::Vector3d& at(int row, int col) const {
    return points[static_cast<std::size_t>(row) * width + col];
  }
};

/// Ground truth produced by the generator: poses, per-frame scene point
/// grids, flow statistics consistent with the camera motion, and motion
/// state labels by construction.
struct GroundTruthWorld {
  WorldConfig config;
  std::vector<RigidPose> gt_trajectory;   // camera-to-world, one per frame
  std::vector<PointGridD> gt_points;      // world coordinates
  std::vector<FlowStats> flow_stats;
  std::vector<MotionState> gt_states;

  std::size_t frame_count() const { return gt_trajectory.size(); }
  double timestamp(std::size_t frame) const { return frame * config.frame_dt; }
};

/// Synthetic pinhole used internally: focal length = image width in
/// pixels, principal point at the image center. Calibration never leaves
/// this module; downstream code is calibration-free.
struct SyntheticPinhole {
  double focal = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  explicit SyntheticPinhole(const WorldConfig& cfg)
      : focal(cfg.image_width),
        cx(0.5 * (cfg.image_width - 1)),
        cy(0.5 * (cfg.image_height - 1)) {}

  Eigen::Vector3d ray(int row, int col) const {
    return {(col - cx) / focal, (row - cy) / focal, 1.0};
  }
  Eigen::Vector2d project(const Eigen::Vector3d& cam_point) const {
    return {focal * cam_point.x() / cam_point.z() + cx,
            focal * cam_point.y() / cam_point.z() + cy};
  }
};

/// Integrates the trajectory primitives, samples per-frame scene points,
/// and derives flow statistics by projecting each frame's points into the
/// next camera. Throws InvalidArgumentError for an empty trajectory, fewer
/// than two total frames, or non-positive dimensions.
GroundTruthWorld generate_world(const WorldConfig& config);

/// Deterministic per-purpose RNG stream; the same key tuple always yields
/// the same stream.
std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0, std::uint64_t d = 0);

}  // namespace mslam
