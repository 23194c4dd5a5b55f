#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mslam/sim3.hpp"

namespace mslam {

/// Closed-form global minimizer of sum_i w_i * |s*R*src_i + t - dst_i|^2:
/// weighted centroid subtraction, weighted cross-covariance SVD with
/// determinant sign correction, scale from the variance ratio.
///
/// Serves as the inner solver of the robust IRLS registration and as the
/// trajectory aligner. Requires at least 3 points carrying positive weight
/// and a non-collinear weighted configuration; throws
/// DegenerateGeometryError otherwise, InvalidArgumentError on size
/// mismatches, negative weights or non-finite input.
Sim3 weighted_umeyama(std::span<const Eigen::Vector3d> src,
                      std::span<const Eigen::Vector3d> dst,
                      std::span<const double> weights);

/// Uniform-weight convenience overload.
Sim3 weighted_umeyama(std::span<const Eigen::Vector3d> src,
                      std::span<const Eigen::Vector3d> dst);

}  // namespace mslam
