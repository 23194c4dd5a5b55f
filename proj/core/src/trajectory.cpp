#include "mslam/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mslam/errors.hpp"

namespace mslam {

void Trajectory::validate() const {
  for (std::size_t i = 1; i < poses.size(); ++i) {
    if (!(poses[i].timestamp > poses[i - 1].timestamp)) {
      throw DataError("Trajectory: timestamps must strictly increase");
    }
  }
}

namespace {

Trajectory load_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_trajectory: cannot open " + path);
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw ParseError("load_trajectory: malformed TUM line " + path + ":" +
                       std::to_string(line_no));
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    const double norm = q.norm();
    if (std::abs(norm - 1.0) > 1e-3) {
      throw DataError("load_trajectory: quaternion norm " +
                      std::to_string(norm) + " at " + path + ":" +
                      std::to_string(line_no));
    }
    q.normalize();
    traj.poses.push_back(
        {ts, RigidPose{Rotation3::from_quaternion(q), {tx, ty, tz}}});
  }
  return traj;
}

Trajectory load_kitti(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_trajectory: cannot open " + path);
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ls >> v[i])) {
        throw ParseError("load_trajectory: malformed KITTI line " + path +
                         ":" + std::to_string(line_no));
      }
    }
    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    traj.poses.push_back(
        {static_cast<double>(traj.poses.size()),
         RigidPose{Rotation3::from_matrix(r), {v[3], v[7], v[11]}}});
  }
  return traj;
}

}  // namespace

Trajectory load_trajectory(const std::string& path, TrajectoryFormat format) {
  Trajectory traj = format == TrajectoryFormat::TUM ? load_tum(path)
                                                    : load_kitti(path);
  traj.validate();
  return traj;
}

void save_trajectory(const std::string& path, const Trajectory& trajectory,
                     TrajectoryFormat format) {
  std::ofstream out(path);
  if (!out) throw ParseError("save_trajectory: cannot open " + path);
  char buf[512];
  if (format == TrajectoryFormat::TUM) {
    out << "# timestamp tx ty tz qx qy qz qw\n";
    for (const TimedPose& tp : trajectory.poses) {
      Eigen::Quaterniond q = tp.pose.rotation.quaternion();
      if (q.w() < 0.0) q.coeffs() = -q.coeffs();  // canonical hemisphere
      const Eigen::Vector3d& t = tp.pose.translation;
      std::snprintf(buf, sizeof(buf),
                    "%.9f %.12f %.12f %.12f %.17g %.17g %.17g %.17g\n",
                    tp.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(),
                    q.w());
      out << buf;
    }
  } else {
    for (const TimedPose& tp : trajectory.poses) {
      const Eigen::Matrix3d& r = tp.pose.rotation.matrix();
      const Eigen::Vector3d& t = tp.pose.translation;
      std::snprintf(buf, sizeof(buf),
                    "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g "
                    "%.17g %.17g %.17g\n",
                    r(0, 0), r(0, 1), r(0, 2), t.x(), r(1, 0), r(1, 1),
                    r(1, 2), t.y(), r(2, 0), r(2, 1), r(2, 2), t.z());
      out << buf;
    }
  }
}

}  // namespace mslam
