#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mslam {

/// 3D rotation stored as an orthonormal matrix. Construction from external
/// data renormalizes once (via quaternion); compositions keep the raw
/// product so hot loops pay no normalization cost.
class Rotation3 {
 public:
  Rotation3() : m_(Eigen::Matrix3d::Identity()) {}

  /// Builds from an arbitrary matrix close to a rotation; renormalizes.
  /// Throws InvalidArgumentError for non-finite input.
  static Rotation3 from_matrix(const Eigen::Matrix3d& m);

  /// Rodrigues formula with series fallback below 1e-6 rad.
  static Rotation3 from_axis_angle(const Eigen::Vector3d& axis_angle);

  static Rotation3 from_quaternion(const Eigen::Quaterniond& q);

  /// Trusts the argument to be orthonormal; used internally for products.
  static Rotation3 from_orthonormal(const Eigen::Matrix3d& m) {
    return Rotation3(m);
  }

  const Eigen::Matrix3d& matrix() const { return m_; }

  /// Rotation angle in [0, pi].
  double angle() const;

  /// Axis-angle vector (angle * unit axis), angle in [0, pi].
  Eigen::Vector3d axis_angle() const;

  Eigen::Quaterniond quaternion() const { return Eigen::Quaterniond(m_); }

  Rotation3 transpose() const { return Rotation3(m_.transpose()); }

  Rotation3 operator*(const Rotation3& rhs) const {
    return Rotation3(Eigen::Matrix3d(m_ * rhs.m_));
  }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }

 private:
  explicit Rotation3(Eigen::Matrix3d m) : m_(std::move(m)) {}
  Eigen::Matrix3d m_;
};

/// Similarity transform x -> s * R * x + t. The gauge object of the whole
/// backend: submap poses, registration constraints and trajectory
/// alignment all live in this group.
struct Sim3 {
  double scale = 1.0;
  Rotation3 rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Sim3 identity() { return Sim3{}; }
};

/// Tangent vector ordered [rho(3) | phi(3) | sigma]: translational part,
/// axis-angle rotational part, log-scale.
using Sim3Tangent = Eigen::Matrix<double, 7, 1>;

/// Group exponential: Rodrigues rotation, scale e^sigma, translation from
/// the analytically integrated left-Jacobian W(phi, sigma) applied to rho.
/// Throws InvalidArgumentError for non-finite input.
Sim3 sim3_exp(const Sim3Tangent& xi);

/// Inverse of sim3_exp. Requires rotation angle < pi - 1e-6; larger angles
/// throw std::domain_error rather than being silently clamped.
Sim3Tangent sim3_log(const Sim3& s);

/// Point action s * R * x + t.
Eigen::Vector3d sim3_apply(const Sim3& s, const Eigen::Vector3d& x);

/// Composition: apply(compose(a, b), x) == apply(a, apply(b, x)).
Sim3 sim3_compose(const Sim3& a, const Sim3& b);

Sim3 sim3_inverse(const Sim3& s);

/// Adjoint matrix mapping tangents: exp(Adj(S) xi) == S exp(xi) S^-1.
Eigen::Matrix<double, 7, 7> sim3_adjoint(const Sim3& s);

/// Rigid pose (scale-fixed special case; rotation + translation in meters).
struct RigidPose {
  Rotation3 rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidPose identity() { return RigidPose{}; }

  Eigen::Vector3d operator*(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }
  RigidPose operator*(const RigidPose& rhs) const {
    return RigidPose{rotation * rhs.rotation,
                     rotation * rhs.translation + translation};
  }
  RigidPose inverse() const {
    Rotation3 rt = rotation.transpose();
    return RigidPose{rt, -(rt * translation)};
  }

  Sim3 as_sim3() const { return Sim3{1.0, rotation, translation}; }
};

/// Rotation + translation of a Sim3, dropping the scale. Used when a
/// similarity-composed camera pose must be reported as a rigid pose.
inline RigidPose rigid_part(const Sim3& s) {
  return RigidPose{s.rotation, s.translation};
}

/// Sim3 composed with a rigid pose, keeping only the rigid part of the
/// result (the scale acts on the camera position, not its orientation).
inline RigidPose apply_sim3_to_pose(const Sim3& g, const RigidPose& p) {
  return RigidPose{g.rotation * p.rotation, sim3_apply(g, p.translation)};
}

}  // namespace mslam
