#include "mslam/sim3.hpp"

#include <cmath>

#include "mslam/errors.hpp"

namespace mslam {

namespace {

constexpr double kSmall = 1e-6;  // series fallback threshold for |phi|, |sigma|

Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  // clang-format off
  m <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return m;
}

/// W(phi, sigma) = C*I + A*hat(phi) + B*hat(phi)^2 with
///   C = int_0^1 e^(sigma*u) du
///   A = int_0^1 e^(sigma*u) * sin(theta*u)/theta du
///   B = int_0^1 e^(sigma*u) * (1 - cos(theta*u))/theta^2 du
/// so that the exponential translation is t = W * rho.
Eigen::Matrix3d calc_w(const Eigen::Vector3d& phi, double sigma) {
  const double theta = phi.norm();
  const double scale = std::exp(sigma);
  const Eigen::Matrix3d omega = hat(phi);
  const Eigen::Matrix3d omega2 = omega * omega;

  double a, b, c;
  if (std::abs(sigma) < kSmall) {
    // second-order series in sigma; residual O(sigma^2) stays below 1e-12
    c = 1.0 + sigma / 2.0 + sigma * sigma / 6.0;
    if (theta < kSmall) {
      const double theta_sq = theta * theta;
      a = 1.0 / 2.0 + sigma / 3.0 - theta_sq / 24.0;
      b = 1.0 / 6.0 + sigma / 8.0 - theta_sq / 120.0;
    } else {
      const double theta_sq = theta * theta;
      const double sin_t = std::sin(theta);
      const double cos_t = std::cos(theta);
      a = (1.0 - cos_t) / theta_sq +
          sigma * (sin_t - theta * cos_t) / (theta_sq * theta);
      b = (theta - sin_t) / (theta_sq * theta) +
          sigma * (theta_sq / 2.0 - cos_t - theta * sin_t + 1.0) /
              (theta_sq * theta_sq);
    }
  } else {
    c = (scale - 1.0) / sigma;
    if (theta < kSmall) {
      const double sigma_sq = sigma * sigma;
      a = ((sigma - 1.0) * scale + 1.0) / sigma_sq;
      b = (scale * (0.5 * sigma_sq - sigma + 1.0) - 1.0) / (sigma_sq * sigma);
    } else {
      const double theta_sq = theta * theta;
      const double sa = scale * std::sin(theta);
      const double sb = scale * std::cos(theta);
      const double denom = theta_sq + sigma * sigma;
      a = (sa * sigma + (1.0 - sb) * theta) / (theta * denom);
      b = (c - ((sb - 1.0) * sigma + sa * theta) / denom) / theta_sq;
    }
  }
  return c * Eigen::Matrix3d::Identity() + a * omega + b * omega2;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& phi) {
  const double theta = phi.norm();
  const Eigen::Matrix3d omega = hat(phi);
  const Eigen::Matrix3d omega2 = omega * omega;
  double k1, k2;
  if (theta < kSmall) {
    const double theta_sq = theta * theta;
    k1 = 1.0 - theta_sq / 6.0;
    k2 = 0.5 - theta_sq / 24.0;
  } else {
    k1 = std::sin(theta) / theta;
    k2 = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Eigen::Matrix3d::Identity() + k1 * omega + k2 * omega2;
}

}  // namespace

Rotation3 Rotation3::from_matrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) {
    throw InvalidArgumentError("Rotation3::from_matrix: non-finite matrix");
  }
  Eigen::Quaterniond q(m);
  q.normalize();
  return Rotation3(q.toRotationMatrix());
}

Rotation3 Rotation3::from_axis_angle(const Eigen::Vector3d& axis_angle) {
  if (!axis_angle.allFinite()) {
    throw InvalidArgumentError("Rotation3::from_axis_angle: non-finite input");
  }
  return Rotation3(rodrigues(axis_angle));
}

Rotation3 Rotation3::from_quaternion(const Eigen::Quaterniond& q) {
  return Rotation3(q.normalized().toRotationMatrix());
}

double Rotation3::angle() const {
  return Eigen::AngleAxisd(m_).angle();
}

Eigen::Vector3d Rotation3::axis_angle() const {
  const Eigen::AngleAxisd aa(m_);
  return aa.angle() * aa.axis();
}

Sim3 sim3_exp(const Sim3Tangent& xi) {
  if (!xi.allFinite()) {
    throw InvalidArgumentError("sim3_exp: non-finite tangent");
  }
  const Eigen::Vector3d rho = xi.head<3>();
  const Eigen::Vector3d phi = xi.segment<3>(3);
  const double sigma = xi(6);

  Sim3 s;
  s.scale = std::exp(sigma);
  s.rotation = Rotation3::from_orthonormal(rodrigues(phi));
  s.translation = calc_w(phi, sigma) * rho;
  return s;
}

Sim3Tangent sim3_log(const Sim3& s) {
  if (!(s.scale > 0.0) || !std::isfinite(s.scale) ||
      !s.translation.allFinite()) {
    throw InvalidArgumentError("sim3_log: invalid transform");
  }
  const Eigen::Vector3d phi = s.rotation.axis_angle();
  const double theta = phi.norm();
  if (theta >= M_PI - 1e-6) {
    throw std::domain_error(
        "sim3_log: rotation angle within 1e-6 of pi; logarithm undefined");
  }
  const double sigma = std::log(s.scale);
  const Eigen::Matrix3d w = calc_w(phi, sigma);

  Sim3Tangent xi;
  xi.head<3>() = w.partialPivLu().solve(s.translation);
  xi.segment<3>(3) = phi;
  xi(6) = sigma;
  return xi;
}

Eigen::Vector3d sim3_apply(const Sim3& s, const Eigen::Vector3d& x) {
  if (!x.allFinite()) {
    throw InvalidArgumentError("sim3_apply: non-finite point");
  }
  return s.scale * (s.rotation * x) + s.translation;
}

Sim3 sim3_compose(const Sim3& a, const Sim3& b) {
  Sim3 out;
  out.scale = a.scale * b.scale;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.scale * (a.rotation * b.translation) + a.translation;
  return out;
}

Sim3 sim3_inverse(const Sim3& s) {
  Sim3 out;
  out.scale = 1.0 / s.scale;
  out.rotation = s.rotation.transpose();
  out.translation = -(out.rotation * s.translation) / s.scale;
  return out;
}

Eigen::Matrix<double, 7, 7> sim3_adjoint(const Sim3& s) {
  const Eigen::Matrix3d r = s.rotation.matrix();
  Eigen::Matrix<double, 7, 7> adj = Eigen::Matrix<double, 7, 7>::Zero();
  adj.block<3, 3>(0, 0) = s.scale * r;
  adj.block<3, 3>(0, 3) = hat(s.translation) * r;
  adj.block<3, 1>(0, 6) = -s.translation;
  adj.block<3, 3>(3, 3) = r;
  adj(6, 6) = 1.0;
  return adj;
}

}  // namespace mslam
