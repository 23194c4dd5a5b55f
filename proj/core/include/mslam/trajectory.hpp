#pragma once

#include <string>
#include <vector>

#include "mslam/sim3.hpp"

namespace mslam {

struct TimedPose {
  double timestamp = 0.0;  // seconds
  RigidPose pose;          // camera to world, meters
};

/// Ordered, strictly increasing timestamps; the unit of evaluation.
struct Trajectory {
  std::vector<TimedPose> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }

  /// Throws DataError unless timestamps strictly increase.
  void validate() const;
};

enum class TrajectoryFormat { TUM, KITTI };

/// TUM lines `timestamp tx ty tz qx qy qz qw`, `#` comments ignored;
/// quaternions are normalized on load and rejected beyond 1e-3 deviation.
/// KITTI lines carry 12 floats of the row-major 3x4 pose; timestamps are
/// synthesized from the line index. Save then load is identity to 1e-9.
Trajectory load_trajectory(const std::string& path, TrajectoryFormat format);
void save_trajectory(const std::string& path, const Trajectory& trajectory,
                     TrajectoryFormat format);

}  // namespace mslam
