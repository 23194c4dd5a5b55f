#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mslam/errors.hpp"
#include "mslam/trajectory.hpp"
#include "support/test_support.hpp"

using namespace mslam;
namespace mt = mslam::testing;

namespace {

Trajectory random_trajectory(std::mt19937_64& rng, int n) {
  Trajectory traj;
  for (int i = 0; i < n; ++i) {
    RigidPose pose;
    const Sim3 s = mt::random_sim3(rng, 2.5, 100.0, 0.0);
    pose.rotation = s.rotation;
    pose.translation = s.translation;
    traj.poses.push_back({0.1 * i, pose});
  }
  return traj;
}

double max_pose_difference(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, (a.poses[i].pose.translation -
                             b.poses[i].pose.translation)
                                .norm());
    worst = std::max(worst, (a.poses[i].pose.rotation.matrix() -
                             b.poses[i].pose.rotation.matrix())
                                .norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("TUM save-load roundtrip") {
  std::mt19937_64 rng(15001);
  const Trajectory traj = random_trajectory(rng, 100);
  const std::string path = "/tmp/mslam_test_traj.tum";
  save_trajectory(path, traj, TrajectoryFormat::TUM);
  const Trajectory loaded = load_trajectory(path, TrajectoryFormat::TUM);
  REQUIRE(loaded.size() == traj.size());
  CHECK(max_pose_difference(traj, loaded) < 1e-9);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(std::abs(loaded.poses[i].timestamp - traj.poses[i].timestamp) <
          1e-9);
  }
  std::filesystem::remove(path);
}

TEST_CASE("KITTI save-load roundtrip") {
  std::mt19937_64 rng(15002);
  const Trajectory traj = random_trajectory(rng, 60);
  const std::string path = "/tmp/mslam_test_traj.kitti";
  save_trajectory(path, traj, TrajectoryFormat::KITTI);
  const Trajectory loaded = load_trajectory(path, TrajectoryFormat::KITTI);
  REQUIRE(loaded.size() == traj.size());
  CHECK(max_pose_difference(traj, loaded) < 1e-9);
  // KITTI timestamps are synthesized from the line index
  CHECK(loaded.poses[5].timestamp == 5.0);
  std::filesystem::remove(path);
}

TEST_CASE("TUM parses identity line and comments") {
  const std::string path = "/tmp/mslam_test_tum_fixture.txt";
  {
    std::ofstream out(path);
    out << "# a comment\n";
    out << "0.0 1 2 3 0 0 0 1\n";
  }
  const Trajectory traj = load_trajectory(path, TrajectoryFormat::TUM);
  REQUIRE(traj.size() == 1);
  CHECK((traj.poses[0].pose.translation - Eigen::Vector3d(1, 2, 3)).norm() ==
        0.0);
  CHECK((traj.poses[0].pose.rotation.matrix() - Eigen::Matrix3d::Identity())
            .norm() < 1e-15);
  std::filesystem::remove(path);
}

TEST_CASE("KITTI parses the identity row") {
  const std::string path = "/tmp/mslam_test_kitti_fixture.txt";
  {
    std::ofstream out(path);
    out << "1 0 0 0 0 1 0 0 0 0 1 0\n";
  }
  const Trajectory traj = load_trajectory(path, TrajectoryFormat::KITTI);
  REQUIRE(traj.size() == 1);
  CHECK(traj.poses[0].pose.translation.norm() == 0.0);
  CHECK((traj.poses[0].pose.rotation.matrix() - Eigen::Matrix3d::Identity())
            .norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("malformed lines carry the line number") {
  const std::string path = "/tmp/mslam_test_bad_traj.txt";
  {
    std::ofstream out(path);
    out << "0.0 1 2 3 0 0 0 1\n";
    out << "0.1 nope\n";
  }
  try {
    load_trajectory(path, TrajectoryFormat::TUM);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("non-normalized quaternions beyond tolerance are data errors") {
  const std::string path = "/tmp/mslam_test_bad_quat.txt";
  {
    std::ofstream out(path);
    out << "0.0 0 0 0 0 0 0 1.5\n";
  }
  CHECK_THROWS_AS(load_trajectory(path, TrajectoryFormat::TUM), DataError);

  {
    std::ofstream out(path);
    out << "0.0 0 0 0 0 0 0 1.0005\n";  // within the 1e-3 tolerance
  }
  CHECK(load_trajectory(path, TrajectoryFormat::TUM).size() == 1);
  std::filesystem::remove(path);
}

TEST_CASE("timestamps must strictly increase") {
  const std::string path = "/tmp/mslam_test_nonmono.txt";
  {
    std::ofstream out(path);
    out << "1.0 0 0 0 0 0 0 1\n";
    out << "0.5 1 0 0 0 0 0 1\n";
  }
  CHECK_THROWS_AS(load_trajectory(path, TrajectoryFormat::TUM), DataError);
  std::filesystem::remove(path);
}
