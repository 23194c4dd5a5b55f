#pragma once

#include <vector>

#include <Eigen/Core>

#include "mslam/geometry_provider.hpp"
#include "mslam/partition.hpp"
#include "mslam/registration.hpp"
#include "mslam/sim3.hpp"
#include "mslam/trajectory.hpp"

namespace mslam {

/// Submap-level Sim(3) pose graph: nodes are local-to-global submap poses,
/// edges carry verified relative constraints weighted by their inlier
/// ratio. The gauge node stays pinned to the identity.
struct PoseGraph {
  std::vector<Sim3> nodes;
  std::vector<Sim3Edge> edges;
  int gauge_node = 0;
};

struct LmParams {
  int max_iters = 100;
  double rel_cost_tol = 1e-10;
  double step_tol = 1e-12;
  double lambda_init = 1e-6;
  double lambda_max = 1e12;
  /// Huber threshold on sqrt(w) * |r|, in tangent units. The default cuts
  /// between drift-sized residuals and wrong constraints. <= 0 selects a
  /// MAD-scaled threshold from the initial residual distribution, which
  /// degenerates when the initialization reproduces the odometry exactly
  /// (all the residual sits on the loop edges); prefer a fixed value.
  double huber_delta = 1.0;
};

struct OptimizeReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> edge_residual_norms;  // at the final estimate
};

/// Lie-algebra residual r = log(S_hat^-1 * X_i^-1 * X_j); zero iff the
/// relative node pose matches the constraint. Log domain errors propagate.
Sim3Tangent edge_residual(const Sim3& x_i, const Sim3& x_j, const Sim3& s_hat);

/// Builds the graph from accepted edges: nodes initialized by chaining
/// odometry edges outward from the gauge node (loop edges only as a
/// connectivity fallback). Throws InvalidArgumentError when any node is
/// unreachable from the gauge.
PoseGraph build_pose_graph(int node_count, const std::vector<Sim3Edge>& edges,
                           int gauge_node = 0);

/// Robustified Levenberg-Marquardt on the Lie group: left-multiplicative
/// increments, Huber-IRLS edge reweighting, sparse Cholesky on the
/// gauge-eliminated normal equations. Accepted steps never increase the
/// robust cost, so report.final_cost <= report.initial_cost.
OptimizeReport optimize_graph(PoseGraph& graph, const LmParams& params = {});

/// Residual Jacobian blocks wrt left increments on (x_i, x_j); the shared
/// core of the optimizer, exposed for finite-difference validation.
void edge_jacobians(const Sim3& x_i, const Sim3& x_j, const Sim3& s_hat,
                    Eigen::Matrix<double, 7, 7>& jac_i,
                    Eigen::Matrix<double, 7, 7>& jac_j);

/// One global pose per keyframe: the optimized submap pose composed with
/// the frame's local pose. Frames shared by several submaps take the pose
/// from the earliest one; a keyframe without a local pose is a DataError.
Trajectory compose_global_trajectory(
    const PoseGraph& graph, const std::vector<Submap>& submaps,
    const std::vector<SubmapGeometry>& geometries, double frame_dt);

}  // namespace mslam
