#include <doctest.h>

#include <cmath>
#include <random>

#include "mslam/errors.hpp"
#include "mslam/sim3.hpp"
#include "support/test_support.hpp"

using namespace mslam;
namespace mt = mslam::testing;

TEST_CASE("sim3_exp of zero tangent is identity") {
  const Sim3 s = sim3_exp(Sim3Tangent::Zero());
  CHECK(s.scale == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((s.rotation.matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-15);
  CHECK(s.translation.norm() < 1e-15);
}

TEST_CASE("sim3_exp of pure log-scale tangent") {
  Sim3Tangent xi = Sim3Tangent::Zero();
  xi(6) = std::log(2.0);
  const Sim3 s = sim3_exp(xi);
  CHECK(s.scale == doctest::Approx(2.0).epsilon(1e-14));
  CHECK((s.rotation.matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(s.translation.norm() < 1e-14);
}

TEST_CASE("sim3_exp matches 4x4 matrix exponential oracle") {
  Sim3Tangent xi = Sim3Tangent::Zero();
  xi(0) = 1.0;
  xi(5) = M_PI / 2.0;
  const Sim3 s = sim3_exp(xi);
  const Eigen::Matrix4d oracle =
      mt::matrix_exp_series(mt::sim3_algebra_matrix(xi));
  CHECK((mt::sim3_matrix(s) - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sim3_exp matches matrix exponential oracle on seeded tangents") {
  std::mt19937_64 rng(7001);
  for (int i = 0; i < 200; ++i) {
    const Sim3Tangent xi = mt::random_tangent(rng, 2.5, 3.0, 0.8);
    const Sim3 s = sim3_exp(xi);
    const Eigen::Matrix4d oracle =
        mt::matrix_exp_series(mt::sim3_algebra_matrix(xi), 40);
    CHECK((mt::sim3_matrix(s) - oracle).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sim3_log inverts sim3_exp") {
  CHECK(sim3_log(Sim3::identity()).norm() == 0.0);

  Sim3 pure_scale;
  pure_scale.scale = std::exp(1.0);
  const Sim3Tangent xi = sim3_log(pure_scale);
  CHECK(xi(6) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(xi.head<6>().norm() < 1e-14);

  std::mt19937_64 rng(7002);
  for (int i = 0; i < 1000; ++i) {
    const Sim3Tangent x = mt::random_tangent(rng, M_PI - 0.01);
    const Sim3Tangent back = sim3_log(sim3_exp(x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sim3_log roundtrip at small rotation angles") {
  std::mt19937_64 rng(7003);
  for (int i = 0; i < 500; ++i) {
    const Sim3Tangent x = mt::random_tangent(rng, 1e-5, 8.0, 1.5);
    const Sim3Tangent back = sim3_log(sim3_exp(x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("sim3_log rejects rotations at pi") {
  Sim3 s;
  s.rotation = Rotation3::from_axis_angle(Eigen::Vector3d(M_PI, 0, 0));
  CHECK_THROWS_AS(sim3_log(s), std::domain_error);
}

TEST_CASE("sim3_log still works just inside the domain boundary") {
  std::mt19937_64 rng(7009);
  for (int i = 0; i < 50; ++i) {
    Sim3Tangent xi = mt::random_tangent(rng, 1.0, 3.0, 0.5);
    xi.segment<3>(3) =
        (M_PI - 1e-5) * xi.segment<3>(3).normalized();  // near the edge
    const Sim3Tangent back = sim3_log(sim3_exp(xi));
    CHECK((back - xi).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("sim3_exp rejects non-finite input") {
  Sim3Tangent xi = Sim3Tangent::Zero();
  xi(2) = std::nan("");
  CHECK_THROWS_AS(sim3_exp(xi), InvalidArgumentError);
}

TEST_CASE("sim3_apply basics") {
  CHECK((sim3_apply(Sim3::identity(), {1, 2, 3}) - Eigen::Vector3d(1, 2, 3))
            .norm() < 1e-15);

  Sim3 s;
  s.scale = 2.0;
  s.translation = Eigen::Vector3d(1, 0, 0);
  CHECK((sim3_apply(s, {1, 1, 1}) - Eigen::Vector3d(3, 2, 2)).norm() < 1e-15);

  Sim3 yaw;
  yaw.rotation = Rotation3::from_axis_angle(Eigen::Vector3d(0, 0, M_PI / 2));
  CHECK((sim3_apply(yaw, {1, 0, 0}) - Eigen::Vector3d(0, 1, 0)).norm() <
        1e-12);
}

TEST_CASE("sim3 compose and inverse closed forms") {
  std::mt19937_64 rng(7004);
  const Sim3 s = mt::random_sim3(rng);
  const Sim3 left = sim3_compose(Sim3::identity(), s);
  CHECK((mt::sim3_matrix(left) - mt::sim3_matrix(s)).norm() < 1e-14);

  Sim3 simple;
  simple.scale = 2.0;
  simple.translation = Eigen::Vector3d(2, 0, 0);
  const Sim3 inv = sim3_inverse(simple);
  CHECK(inv.scale == doctest::Approx(0.5).epsilon(1e-15));
  CHECK((inv.translation - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("compose agrees with chained point action on seeded pairs") {
  std::mt19937_64 rng(7005);
  for (int i = 0; i < 500; ++i) {
    const Sim3 a = mt::random_sim3(rng);
    const Sim3 b = mt::random_sim3(rng);
    const Eigen::Vector3d x = mt::random_point(rng);
    const Eigen::Vector3d lhs = sim3_apply(sim3_compose(a, b), x);
    const Eigen::Vector3d rhs = sim3_apply(a, sim3_apply(b, x));
    CHECK((lhs - rhs).norm() < 1e-9);
  }
}

TEST_CASE("group axioms: associativity and two-sided inverse") {
  std::mt19937_64 rng(7006);
  for (int i = 0; i < 200; ++i) {
    const Sim3 a = mt::random_sim3(rng);
    const Sim3 b = mt::random_sim3(rng);
    const Sim3 c = mt::random_sim3(rng);
    const Eigen::Vector3d x = mt::random_point(rng);

    const Eigen::Vector3d assoc_l =
        sim3_apply(sim3_compose(sim3_compose(a, b), c), x);
    const Eigen::Vector3d assoc_r =
        sim3_apply(sim3_compose(a, sim3_compose(b, c)), x);
    CHECK((assoc_l - assoc_r).norm() < 1e-9);

    const Sim3 inv = sim3_inverse(a);
    CHECK((sim3_apply(sim3_compose(a, inv), x) - x).norm() < 1e-9);
    CHECK((sim3_apply(sim3_compose(inv, a), x) - x).norm() < 1e-9);
  }
}

TEST_CASE("adjoint identity exp(Adj(S) xi) == S exp(xi) S^-1") {
  std::mt19937_64 rng(7007);
  for (int i = 0; i < 100; ++i) {
    const Sim3 s = mt::random_sim3(rng, 2.0, 2.0, 0.5);
    const Sim3Tangent xi = mt::random_tangent(rng, 0.5, 0.5, 0.2);
    const Sim3 lhs = sim3_exp(sim3_adjoint(s) * xi);
    const Sim3 rhs =
        sim3_compose(sim3_compose(s, sim3_exp(xi)), sim3_inverse(s));
    CHECK((mt::sim3_matrix(lhs) - mt::sim3_matrix(rhs)).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("rotation invariants after renormalizing construction") {
  std::mt19937_64 rng(7008);
  for (int i = 0; i < 100; ++i) {
    Eigen::Matrix3d noisy = mt::random_sim3(rng).rotation.matrix();
    noisy.array() += 1e-11;
    const Rotation3 r = Rotation3::from_matrix(noisy);
    CHECK((r.matrix() * r.matrix().transpose() - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    CHECK(r.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}
