#pragma once

#include <random>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "mslam/sim3.hpp"

namespace mslam::testing {

/// Truncated series for the 4x4 matrix exponential. Oracle for sim3_exp:
/// independent of the closed-form W path, converges fast for the moderate
/// tangents used in tests.
inline Eigen::Matrix4d matrix_exp_series(const Eigen::Matrix4d& m,
                                         int terms = 30) {
  Eigen::Matrix4d result = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d power = Eigen::Matrix4d::Identity();
  double factorial = 1.0;
  for (int k = 1; k <= terms; ++k) {
    power = Eigen::Matrix4d(power * m);
    factorial *= k;
    result += power / factorial;
  }
  return result;
}

/// 4x4 Lie-algebra matrix of a sim3 tangent [rho | phi | sigma]:
/// [[sigma*I + hat(phi), rho], [0, 0]].
inline Eigen::Matrix4d sim3_algebra_matrix(const Sim3Tangent& xi) {
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d phi = xi.segment<3>(3);
  const double sigma = xi(6);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 1) = -phi.z();
  m(0, 2) = phi.y();
  m(1, 0) = phi.z();
  m(1, 2) = -phi.x();
  m(2, 0) = -phi.y();
  m(2, 1) = phi.x();
  m(0, 0) = m(1, 1) = m(2, 2) = 0.0;
  m.block<3, 3>(0, 0) += sigma * Eigen::Matrix3d::Identity();
  m.block<3, 1>(0, 3) = rho;
  return m;
}

/// Homogeneous 4x4 of a Sim3 (top-left s*R, top-right t).
inline Eigen::Matrix4d sim3_matrix(const Sim3& s) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) = s.scale * s.rotation.matrix();
  m.block<3, 1>(0, 3) = s.translation;
  return m;
}

inline Eigen::Vector3d random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = Eigen::Vector3d(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Sim3Tangent random_tangent(std::mt19937_64& rng, double max_angle,
                                  double rho_range = 5.0,
                                  double sigma_range = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> angle_dist(0.0, max_angle);
  Sim3Tangent xi;
  xi.head<3>() = rho_range * Eigen::Vector3d(u(rng), u(rng), u(rng));
  xi.segment<3>(3) = angle_dist(rng) * random_unit_vector(rng);
  xi(6) = sigma_range * u(rng);
  return xi;
}

inline Sim3 random_sim3(std::mt19937_64& rng, double max_angle = 3.0,
                        double trans_range = 5.0, double sigma_range = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> angle_dist(0.0, max_angle);
  Sim3 s;
  s.scale = std::exp(sigma_range * u(rng));
  s.rotation = Rotation3::from_axis_angle(angle_dist(rng) *
                                          random_unit_vector(rng));
  s.translation = trans_range * Eigen::Vector3d(u(rng), u(rng), u(rng));
  return s;
}

inline Eigen::Vector3d random_point(std::mt19937_64& rng, double range = 10.0) {
  std::uniform_real_distribution<double> u(-range, range);
  return Eigen::Vector3d(u(rng), u(rng), u(rng));
}

}  // namespace mslam::testing
