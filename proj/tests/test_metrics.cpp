#include <doctest.h>

#include <cmath>
#include <random>

#include "mslam/errors.hpp"
#include "mslam/metrics.hpp"
#include "support/test_support.hpp"

using namespace mslam;
namespace mt = mslam::testing;

namespace {

Trajectory random_trajectory(std::mt19937_64& rng, int n, double step = 1.0) {
  Trajectory traj;
  RigidPose pose;
  for (int i = 0; i < n; ++i) {
    traj.poses.push_back({0.1 * i, pose});
    Sim3Tangent t = mt::random_tangent(rng, 0.05, 0.0, 0.0);
    RigidPose inc;
    inc.rotation = Rotation3::from_axis_angle(t.segment<3>(3));
    inc.translation =
        Eigen::Vector3d(step, 0.1 * std::sin(0.2 * i), 0.05 * std::cos(0.1 * i));
    pose = pose * inc;
  }
  return traj;
}

Trajectory transform_trajectory(const Trajectory& traj, const Sim3& s) {
  Trajectory out = traj;
  for (auto& tp : out.poses) tp.pose = apply_sim3_to_pose(s, tp.pose);
  return out;
}

Trajectory straight_line(int n, double step) {
  Trajectory traj;
  for (int i = 0; i < n; ++i) {
    RigidPose pose;
    pose.translation = Eigen::Vector3d(step * i, 0, 0);
    traj.poses.push_back({0.1 * i, pose});
  }
  return traj;
}

}  // namespace

TEST_CASE("align_sim3 basics") {
  std::mt19937_64 rng(14001);
  const Trajectory ref = random_trajectory(rng, 100);

  const Sim3 identity = align_sim3(ref, ref);
  CHECK(std::abs(identity.scale - 1.0) < 1e-9);
  CHECK(identity.translation.norm() < 1e-9);

  Sim3 triple;
  triple.scale = 3.0;
  const Trajectory scaled = transform_trajectory(ref, triple);
  const Sim3 back = align_sim3(scaled, ref);
  CHECK(std::abs(back.scale - 1.0 / 3.0) < 1e-9);

  Sim3 offset;
  offset.translation = Eigen::Vector3d(1, 2, 3);
  const Trajectory shifted = transform_trajectory(ref, offset);
  const Sim3 undo = align_sim3(shifted, ref);
  CHECK(std::abs(undo.scale - 1.0) < 1e-9);
  CHECK((undo.translation + Eigen::Vector3d(1, 2, 3)).norm() < 1e-9);
  CHECK(undo.rotation.angle() < 1e-9);
}

TEST_CASE("align_sim3 needs three non-collinear matches") {
  Trajectory two;
  two.poses.push_back({0.0, RigidPose{}});
  RigidPose p;
  p.translation = Eigen::Vector3d(1, 0, 0);
  two.poses.push_back({0.1, p});
  CHECK_THROWS_AS(align_sim3(two, two), InsufficientCorrespondencesError);

  const Trajectory line = straight_line(50, 1.0);
  CHECK_THROWS_AS(align_sim3(line, line), InsufficientCorrespondencesError);
}

TEST_CASE("ate_rmse basics and Sim(3) invariance") {
  std::mt19937_64 rng(14002);
  const Trajectory ref = random_trajectory(rng, 200);
  CHECK(ate_rmse(ref, ref) < 1e-12);

  const Sim3 arbitrary = mt::random_sim3(rng, 2.0, 30.0, 1.0);
  const Trajectory moved = transform_trajectory(ref, arbitrary);
  CHECK(ate_rmse(moved, ref) < 1e-9);
}

TEST_CASE("ate_rmse hand fixture: unit residuals on half the poses") {
  // construction that pins the optimal alignment to the identity: paired
  // symmetric positions kill the rotation and translation couplings,
  // zero-mean displacements kill the mean, and a huge spread makes the
  // scale coupling negligible against the 1e-9 tolerance
  std::mt19937_64 rng(14003);
  std::uniform_real_distribution<double> u(-30000.0, 30000.0);
  Trajectory ref;
  Trajectory est;
  const int pairs = 100;
  for (int j = 0; j < pairs; ++j) {
    const Eigen::Vector3d q(u(rng), u(rng), u(rng));
    Eigen::Vector3d displacement = Eigen::Vector3d::Zero();
    if (j % 2 == 0) {
      displacement = Eigen::Vector3d(0, 0, (j % 4 == 0) ? 1.0 : -1.0);
    }
    for (const Eigen::Vector3d& p : {q, Eigen::Vector3d(-q)}) {
      RigidPose rp;
      rp.translation = p;
      ref.poses.push_back({0.1 * ref.size(), rp});
      RigidPose ep;
      ep.translation = p + displacement;
      est.poses.push_back({0.1 * est.size(), ep});
    }
  }
  // half the poses carry residual 1, the rest 0: RMSE = sqrt(0.5)
  const double rmse = ate_rmse(est, ref);
  CHECK(std::abs(rmse - std::sqrt(0.5)) < 1e-9);
}

TEST_CASE("drift is zero on identical trajectories") {
  const Trajectory ref = straight_line(1200, 1.0);  // 1199 m path
  const DriftReport report = translation_drift(ref, ref);
  REQUIRE(report.drift_percent.has_value());
  CHECK(*report.drift_percent == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(report.segments_evaluated > 0);
}

TEST_CASE("pure scale drift reports the scale error") {
  const Trajectory ref = straight_line(1200, 1.0);
  Trajectory est = ref;
  for (auto& tp : est.poses) tp.pose.translation *= 1.01;
  const DriftReport report = translation_drift(est, ref);
  REQUIRE(report.drift_percent.has_value());
  CHECK(std::abs(*report.drift_percent - 1.0) < 0.05);
}

TEST_CASE("linearly growing lateral error matches the analytic average") {
  const int n = 1001;  // 1000 m straight reference
  const Trajectory ref = straight_line(n, 1.0);
  Trajectory est = ref;
  for (int i = 0; i < n; ++i) {
    est.poses[i].pose.translation.y() += 5.0 * i / 1000.0;
  }
  // every evaluated segment of length L has relative lateral error
  // 0.005 * L, so the average drift is exactly 0.5 percent
  const DriftReport report = translation_drift(est, ref);
  REQUIRE(report.drift_percent.has_value());
  CHECK(std::abs(*report.drift_percent - 0.5) < 1e-6);
}

TEST_CASE("drift is invariant under a rigid pre-transform") {
  std::mt19937_64 rng(14004);
  Trajectory ref = straight_line(900, 1.0);
  Trajectory est = ref;
  for (std::size_t i = 0; i < est.poses.size(); ++i) {
    est.poses[i].pose.translation +=
        0.02 * Eigen::Vector3d(std::sin(0.1 * i), std::cos(0.07 * i), 0.0);
  }
  const Sim3 rigid = mt::random_sim3(rng, 2.0, 50.0, 0.0);  // scale 1
  const Trajectory moved = transform_trajectory(est, rigid);

  const DriftReport a = translation_drift(est, ref);
  const DriftReport b = translation_drift(moved, ref);
  REQUIRE(a.drift_percent.has_value());
  REQUIRE(b.drift_percent.has_value());
  CHECK(std::abs(*a.drift_percent - *b.drift_percent) < 1e-9);
}

TEST_CASE("short trajectories give not-applicable drift") {
  const Trajectory ref = straight_line(50, 1.0);  // 49 m, below 100 m
  const DriftReport report = translation_drift(ref, ref);
  CHECK_FALSE(report.drift_percent.has_value());
  CHECK(report.segments_evaluated == 0);
}

TEST_CASE("association handles offsets and windows") {
  const Trajectory ref = straight_line(100, 1.0);
  Trajectory est = ref;
  for (auto& tp : est.poses) tp.timestamp += 0.02;  // within the window
  const Association a = associate_by_timestamp(est, ref);
  CHECK(a.matches.size() == 100);

  for (auto& tp : est.poses) tp.timestamp += 1000.0;  // far outside
  const Association b = associate_by_timestamp(est, ref);
  CHECK(b.matches.empty());
}

TEST_CASE("metric report formatting") {
  MetricReport report;
  report.ate_rmse_m = 1.25;
  report.matched_poses = 42;
  report.segments_evaluated = 7;
  const std::string text = format_metric_report(report);
  CHECK(text.find("ate_rmse_m=1.25") != std::string::npos);
  CHECK(text.find("drift_pct=n/a") != std::string::npos);
  CHECK(text.find("matched_poses=42") != std::string::npos);
}
