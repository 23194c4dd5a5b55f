#include "mslam/world.hpp"

#include <cmath>
#include <random>

#include "mslam/errors.hpp"

namespace mslam {

namespace {

/// splitmix64; stable hash combine for RNG stream keys.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Camera-to-world pose at planar position (x, y) with heading theta:
/// camera x points right, y down, z forward along the heading.
RigidPose planar_pose(double x, double y, double heading) {
  Eigen::Matrix3d r;
  r.col(0) = Eigen::Vector3d(std::sin(heading), -std::cos(heading), 0.0);
  r.col(1) = Eigen::Vector3d(0.0, 0.0, -1.0);
  r.col(2) = Eigen::Vector3d(std::cos(heading), std::sin(heading), 0.0);
  return RigidPose{Rotation3::from_orthonormal(r), Eigen::Vector3d(x, y, 0.0)};
}

}  // namespace

std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c, std::uint64_t d) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  h = splitmix64(h ^ d);
  return h;
}

GroundTruthWorld generate_world(const WorldConfig& config) {
  if (config.trajectory.empty()) {
    throw InvalidArgumentError("generate_world: at least one trajectory primitive");
  }
  if (config.image_width <= 0 || config.image_height <= 0 ||
      config.depth_min_m <= 0.0 || config.depth_max_m <= config.depth_min_m) {
    throw InvalidArgumentError("generate_world: non-positive dimensions");
  }

  GroundTruthWorld world;
  world.config = config;

  // integrate primitives; pose cursor carries position and heading
  double px = 0.0, py = 0.0, heading = 0.0;
  for (const TrajectoryPrimitive& prim : config.trajectory) {
    if (std::holds_alternative<StraightSegment>(prim)) {
      const auto& seg = std::get<StraightSegment>(prim);
      if (seg.frames <= 0 || seg.length_m < 0.0) {
        throw InvalidArgumentError("generate_world: invalid straight segment");
      }
      const double step = seg.length_m / seg.frames;
      for (int k = 1; k <= seg.frames; ++k) {
        const double x = px + step * k * std::cos(heading);
        const double y = py + step * k * std::sin(heading);
        world.gt_trajectory.push_back(planar_pose(x, y, heading));
        world.gt_states.push_back(MotionState::Linear);
      }
      px += seg.length_m * std::cos(heading);
      py += seg.length_m * std::sin(heading);
    } else if (std::holds_alternative<ArcSegment>(prim)) {
      const auto& seg = std::get<ArcSegment>(prim);
      if (seg.frames <= 0 || seg.radius_m <= 0.0 || seg.sweep_rad == 0.0) {
        throw InvalidArgumentError("generate_world: invalid arc segment");
      }
      const double sign = seg.sweep_rad >= 0.0 ? 1.0 : -1.0;
      // circle center sits on the turning side, normal to the heading
      const double cx = px - sign * seg.radius_m * std::sin(heading);
      const double cy = py + sign * seg.radius_m * std::cos(heading);
      const double dtheta = seg.sweep_rad / seg.frames;
      for (int k = 1; k <= seg.frames; ++k) {
        const double h = heading + dtheta * k;
        const double x = cx + sign * seg.radius_m * std::sin(h);
        const double y = cy - sign * seg.radius_m * std::cos(h);
        world.gt_trajectory.push_back(planar_pose(x, y, h));
        world.gt_states.push_back(MotionState::Turning);
      }
      px = cx + sign * seg.radius_m * std::sin(heading + seg.sweep_rad);
      py = cy - sign * seg.radius_m * std::cos(heading + seg.sweep_rad);
      heading += seg.sweep_rad;
    } else {
      const auto& stop = std::get<Stop>(prim);
      if (stop.frames <= 0) {
        throw InvalidArgumentError("generate_world: invalid stop");
      }
      for (int k = 0; k < stop.frames; ++k) {
        world.gt_trajectory.push_back(planar_pose(px, py, heading));
        world.gt_states.push_back(MotionState::Static);
      }
    }
  }
  const std::size_t frames = world.gt_trajectory.size();
  if (frames < 2) {
    throw InvalidArgumentError("generate_world: need at least two frames");
  }

  // per-frame scene points: every pixel gets a depth in range, then is
  // back-projected through the synthetic pinhole into world coordinates
  const SyntheticPinhole cam(config);
  const int w = config.image_width;
  const int h = config.image_height;
  world.gt_points.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    PointGridD& grid = world.gt_points[t];
    grid.width = w;
    grid.height = h;
    grid.points.resize(static_cast<std::size_t>(w) * h);
    std::mt19937_64 rng(hash_key(config.seed, 0x506f696e74ULL, t));
    std::uniform_real_distribution<double> depth(config.depth_min_m,
                                                 config.depth_max_m);
    const RigidPose& pose = world.gt_trajectory[t];
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        const Eigen::Vector3d cam_point = depth(rng) * cam.ray(row, col);
        grid.points[static_cast<std::size_t>(row) * w + col] = pose * cam_point;
      }
    }
  }

  // flow statistics: project frame t-1 points into camera t
  world.flow_stats.resize(frames);
  for (std::size_t t = 1; t < frames; ++t) {
    const RigidPose to_cam = world.gt_trajectory[t].inverse();
    const PointGridD& prev = world.gt_points[t - 1];
    double sum_mag = 0.0;
    double sum_abs_fx = 0.0;
    std::size_t quasi_static = 0;
    std::size_t count = 0;
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        const Eigen::Vector3d c = to_cam * prev.at(row, col);
        if (c.z() <= 1e-6) continue;  // behind the camera; skip
        const Eigen::Vector2d proj = cam.project(c);
        const double fx = proj.x() - col;
        const double fy = proj.y() - row;
        const double mag = std::hypot(fx, fy);
        sum_mag += mag;
        sum_abs_fx += std::abs(fx);
        if (mag < config.tau_flow) ++quasi_static;
        ++count;
      }
    }
    FlowStats& fs = world.flow_stats[t];
    fs.frame_index = static_cast<int>(t);
    if (count > 0) {
      fs.mean_flow_mag = sum_mag / count;
      fs.static_ratio_raw = static_cast<double>(quasi_static) / count;
      fs.turning_score_raw = sum_abs_fx / count;
    } else {
      fs.static_ratio_raw = 1.0;
    }
  }
  // frame 0 has no predecessor; copy frame 1 so no spurious static label
  world.flow_stats[0] = world.flow_stats[1];
  world.flow_stats[0].frame_index = 0;

  return world;
}

}  // namespace mslam
