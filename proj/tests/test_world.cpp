#include <doctest.h>

#include <cmath>

#include "mslam/errors.hpp"
#include "mslam/world.hpp"

using namespace mslam;

namespace {

WorldConfig small_config() {
  WorldConfig cfg;
  cfg.seed = 42;
  cfg.image_width = 32;
  cfg.image_height = 24;
  cfg.sky_band_rows = 4;
  return cfg;
}

double heading_of(const RigidPose& pose) {
  const Eigen::Vector3d fwd = pose.rotation.matrix().col(2);
  return std::atan2(fwd.y(), fwd.x());
}

}  // namespace

TEST_CASE("stop primitive produces identical static poses") {
  WorldConfig cfg = small_config();
  cfg.trajectory = {Stop{50}};
  const auto world = generate_world(cfg);
  REQUIRE(world.frame_count() == 50);
  for (std::size_t t = 0; t < 50; ++t) {
    CHECK((world.gt_trajectory[t].translation -
           world.gt_trajectory[0].translation)
              .norm() == 0.0);
    CHECK(world.gt_states[t] == MotionState::Static);
    CHECK(world.flow_stats[t].static_ratio_raw >= 0.99);
    CHECK(world.flow_stats[t].mean_flow_mag <= 0.01);
  }
}

TEST_CASE("straight segment advances uniformly") {
  WorldConfig cfg = small_config();
  cfg.trajectory = {StraightSegment{100.0, 100}};
  const auto world = generate_world(cfg);
  REQUIRE(world.frame_count() == 100);
  for (std::size_t t = 1; t < 100; ++t) {
    const double step = (world.gt_trajectory[t].translation -
                         world.gt_trajectory[t - 1].translation)
                            .norm();
    CHECK(step == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(world.gt_states[t] == MotionState::Linear);
  }
}

TEST_CASE("arc segment rotates the heading by the sweep") {
  WorldConfig cfg = small_config();
  cfg.trajectory = {StraightSegment{20.0, 20}, ArcSegment{20.0, M_PI / 2, 45}};
  const auto world = generate_world(cfg);
  REQUIRE(world.frame_count() == 65);

  const double h0 = heading_of(world.gt_trajectory[19]);
  const double h1 = heading_of(world.gt_trajectory[64]);
  CHECK(std::abs(std::remainder(h1 - h0 - M_PI / 2, 2 * M_PI)) < 1e-9);

  // closed-form arc: every pose sits on the circle around the center
  const Eigen::Vector3d start = world.gt_trajectory[19].translation;
  const Eigen::Vector3d center = start + 20.0 * Eigen::Vector3d(-std::sin(h0),
                                                                std::cos(h0), 0);
  for (std::size_t t = 20; t < 65; ++t) {
    CHECK((world.gt_trajectory[t].translation - center).norm() ==
          doctest::Approx(20.0).epsilon(1e-9));
    CHECK(world.gt_states[t] == MotionState::Turning);
  }
}

TEST_CASE("arc flow is laterally dominated, straight flow is not") {
  WorldConfig cfg = small_config();
  cfg.image_width = 64;
  cfg.image_height = 48;
  // 10-frame quarter turn: yaw rate well above the turning threshold
  cfg.trajectory = {StraightSegment{60.0, 40}, ArcSegment{48.0, M_PI / 2, 10},
                    StraightSegment{60.0, 40}};
  const auto world = generate_world(cfg);

  // flow stats describe motion into frame t, so arc-dominated stats span
  // the arc frames 41..49; the first post-arc frame is already straight
  MotionParams motion;  // tau_turn = 5
  for (std::size_t t = 41; t <= 49; ++t) {
    CHECK(world.flow_stats[t].turning_score_raw >= 2.0 * motion.tau_turn);
  }
  for (std::size_t t = 5; t < 40; ++t) {
    CHECK(world.flow_stats[t].turning_score_raw <= motion.tau_turn / 2.0);
    CHECK(world.flow_stats[t].static_ratio_raw <= motion.tau_static / 2.0);
  }
}

TEST_CASE("world generation is bit-identical for identical config") {
  WorldConfig cfg = small_config();
  cfg.trajectory = {StraightSegment{30.0, 30}, Stop{10},
                    ArcSegment{15.0, 1.0, 12}};
  const auto a = generate_world(cfg);
  const auto b = generate_world(cfg);
  REQUIRE(a.frame_count() == b.frame_count());
  for (std::size_t t = 0; t < a.frame_count(); ++t) {
    CHECK(a.flow_stats[t].mean_flow_mag == b.flow_stats[t].mean_flow_mag);
    CHECK((a.gt_trajectory[t].translation - b.gt_trajectory[t].translation)
              .norm() == 0.0);
    for (std::size_t i = 0; i < a.gt_points[t].points.size(); ++i) {
      CHECK(a.gt_points[t].points[i] == b.gt_points[t].points[i]);
    }
  }

  WorldConfig other = cfg;
  other.seed = 43;
  const auto c = generate_world(other);
  CHECK(a.gt_points[0].points[0] != c.gt_points[0].points[0]);
}

TEST_CASE("generate_world validates its input") {
  WorldConfig cfg = small_config();
  CHECK_THROWS_AS(generate_world(cfg), InvalidArgumentError);  // no primitives
  cfg.trajectory = {Stop{1}};
  CHECK_THROWS_AS(generate_world(cfg), InvalidArgumentError);  // one frame
  cfg.trajectory = {Stop{5}};
  cfg.image_width = 0;
  CHECK_THROWS_AS(generate_world(cfg), InvalidArgumentError);
}
