#include "mslam/umeyama.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "mslam/errors.hpp"

namespace mslam {

Sim3 weighted_umeyama(std::span<const Eigen::Vector3d> src,
                      std::span<const Eigen::Vector3d> dst,
                      std::span<const double> weights) {
  const std::size_t n = src.size();
  if (dst.size() != n || weights.size() != n) {
    throw InvalidArgumentError("weighted_umeyama: size mismatch");
  }

  double w_total = 0.0;
  std::size_t n_positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgumentError("weighted_umeyama: weights must be finite and >= 0");
    }
    if (!src[i].allFinite() || !dst[i].allFinite()) {
      throw InvalidArgumentError("weighted_umeyama: non-finite point");
    }
    if (w > 0.0) ++n_positive;
    w_total += w;
  }
  if (n_positive < 3 || w_total <= 0.0) {
    throw DegenerateGeometryError(
        "weighted_umeyama: need >= 3 points with positive weight");
  }

  Eigen::Vector3d mu_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_src += weights[i] * src[i];
    mu_dst += weights[i] * dst[i];
  }
  mu_src /= w_total;
  mu_dst /= w_total;

  // cross-covariance of dst against src and source variance
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] == 0.0) continue;
    const Eigen::Vector3d ds = src[i] - mu_src;
    const Eigen::Vector3d dd = dst[i] - mu_dst;
    cov += weights[i] * dd * ds.transpose();
    var_src += weights[i] * ds.squaredNorm();
  }
  cov /= w_total;
  var_src /= w_total;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (var_src <= 0.0 || sv(1) <= 1e-12 * sv(0) || sv(0) <= 0.0) {
    throw DegenerateGeometryError(
        "weighted_umeyama: rank-deficient configuration");
  }

  Eigen::Vector3d d_sign = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    d_sign(2) = -1.0;
  }

  const Eigen::Matrix3d r =
      svd.matrixU() * d_sign.asDiagonal() * svd.matrixV().transpose();
  const double scale = sv.dot(d_sign) / var_src;
  if (!(scale > 0.0)) {
    throw DegenerateGeometryError("weighted_umeyama: non-positive scale");
  }

  Sim3 out;
  out.scale = scale;
  out.rotation = Rotation3::from_matrix(r);
  out.translation = mu_dst - scale * (out.rotation * mu_src);
  return out;
}

Sim3 weighted_umeyama(std::span<const Eigen::Vector3d> src,
                      std::span<const Eigen::Vector3d> dst) {
  const std::vector<double> w(src.size(), 1.0);
  return weighted_umeyama(src, dst, w);
}

}  // namespace mslam
