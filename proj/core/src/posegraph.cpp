#include "mslam/posegraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "mslam/errors.hpp"

namespace mslam {

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t n = values.size();
  std::nth_element(values.begin(), values.begin() + n / 2, values.end());
  double med = values[n / 2];
  if (n % 2 == 0) {
    const auto lower = std::max_element(values.begin(), values.begin() + n / 2);
    med = 0.5 * (med + *lower);
  }
  return med;
}

/// Huber applied to the weighted squared residual e = w * |r|^2, with the
/// threshold expressed on u = sqrt(e).
double huber_of_chi2(double e, double delta) {
  const double u = std::sqrt(e);
  return u <= delta ? e : 2.0 * delta * u - delta * delta;
}

/// IRLS factor rho'(e): 1 in the quadratic region, delta/u beyond it.
double huber_weight_of_chi2(double e, double delta) {
  const double u = std::sqrt(e);
  return (u <= delta || u == 0.0) ? 1.0 : delta / u;
}

struct EdgeState {
  Sim3Tangent residual;
  double chi2 = 0.0;  // w * |r|^2
};

double total_cost(const PoseGraph& graph, double delta,
                  std::vector<EdgeState>* states) {
  double cost = 0.0;
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Sim3Edge& edge = graph.edges[e];
    const Sim3Tangent r = edge_residual(graph.nodes[edge.from_submap],
                                        graph.nodes[edge.to_submap],
                                        edge.transform);
    const double chi2 = edge.inlier_ratio * r.squaredNorm();
    cost += huber_of_chi2(chi2, delta);
    if (states) {
      (*states)[e].residual = r;
      (*states)[e].chi2 = chi2;
    }
  }
  if (!std::isfinite(cost)) {
    throw NumericalFailureError("optimize_graph: non-finite cost");
  }
  return cost;
}

}  // namespace

Sim3Tangent edge_residual(const Sim3& x_i, const Sim3& x_j,
                          const Sim3& s_hat) {
  return sim3_log(
      sim3_compose(sim3_inverse(s_hat), sim3_compose(sim3_inverse(x_i), x_j)));
}

void edge_jacobians(const Sim3& x_i, const Sim3& x_j, const Sim3& s_hat,
                    Eigen::Matrix<double, 7, 7>& jac_i,
                    Eigen::Matrix<double, 7, 7>& jac_j) {
  const Sim3 lhs = sim3_compose(sim3_inverse(s_hat), sim3_inverse(x_i));
  const Sim3 m = sim3_compose(lhs, x_j);

  // left perturbations of either node enter as exp(+-Adj(lhs) eps) * m, so
  // only the differential of log at m is evaluated numerically
  const double h = 1e-6;
  Eigen::Matrix<double, 7, 7> dlog;
  for (int k = 0; k < 7; ++k) {
    Sim3Tangent step = Sim3Tangent::Zero();
    step(k) = h;
    const Sim3Tangent plus = sim3_log(sim3_compose(sim3_exp(step), m));
    step(k) = -h;
    const Sim3Tangent minus = sim3_log(sim3_compose(sim3_exp(step), m));
    dlog.col(k) = (plus - minus) / (2.0 * h);
  }
  jac_j = dlog * sim3_adjoint(lhs);
  jac_i = -jac_j;
}

PoseGraph build_pose_graph(int node_count, const std::vector<Sim3Edge>& edges,
                           int gauge_node) {
  if (node_count <= 0 || gauge_node < 0 || gauge_node >= node_count) {
    throw InvalidArgumentError("build_pose_graph: bad node count or gauge");
  }
  PoseGraph graph;
  graph.gauge_node = gauge_node;
  graph.nodes.assign(node_count, Sim3::identity());
  for (const Sim3Edge& edge : edges) {
    if (edge.from_submap < 0 || edge.from_submap >= node_count ||
        edge.to_submap < 0 || edge.to_submap >= node_count) {
      throw InvalidArgumentError("build_pose_graph: edge references missing node");
    }
    if (edge.accepted) graph.edges.push_back(edge);
  }

  // breadth-first initialization from the gauge, odometry edges first
  std::vector<char> initialized(node_count, 0);
  initialized[gauge_node] = 1;
  for (const bool odometry_only : {true, false}) {
    std::deque<int> queue;
    for (int n = 0; n < node_count; ++n) {
      if (initialized[n]) queue.push_back(n);
    }
    while (!queue.empty()) {
      const int n = queue.front();
      queue.pop_front();
      for (const Sim3Edge& edge : graph.edges) {
        if (odometry_only && edge.kind != EdgeKind::Odometry) continue;
        int other = -1;
        Sim3 value;
        if (edge.from_submap == n && !initialized[edge.to_submap]) {
          other = edge.to_submap;
          value = sim3_compose(graph.nodes[n], edge.transform);
        } else if (edge.to_submap == n && !initialized[edge.from_submap]) {
          other = edge.from_submap;
          value = sim3_compose(graph.nodes[n], sim3_inverse(edge.transform));
        }
        if (other >= 0) {
          graph.nodes[other] = value;
          initialized[other] = 1;
          queue.push_back(other);
        }
      }
    }
  }
  for (int n = 0; n < node_count; ++n) {
    if (!initialized[n]) {
      throw InvalidArgumentError(
          "build_pose_graph: node " + std::to_string(n) +
          " unreachable from the gauge node");
    }
  }
  return graph;
}

OptimizeReport optimize_graph(PoseGraph& graph, const LmParams& params) {
  OptimizeReport report;
  const int node_count = static_cast<int>(graph.nodes.size());
  const std::size_t edge_count = graph.edges.size();
  if (node_count == 0) {
    throw InvalidArgumentError("optimize_graph: empty graph");
  }

  std::vector<EdgeState> states(edge_count);

  // Huber threshold: explicit, or MAD-scaled from the initial residual
  // distribution. Zero residuals carry no scale information, so the
  // median runs over the non-negligible ones.
  double delta = params.huber_delta;
  if (delta <= 0.0) {
    double max_u = 0.0;
    std::vector<double> norms;
    for (const Sim3Edge& edge : graph.edges) {
      const Sim3Tangent r = edge_residual(graph.nodes[edge.from_submap],
                                          graph.nodes[edge.to_submap],
                                          edge.transform);
      const double u = std::sqrt(edge.inlier_ratio) * r.norm();
      max_u = std::max(max_u, u);
      if (u > 1e-12) norms.push_back(u);
    }
    delta = norms.empty() ? 1.0
                          : std::max(1.345 * 1.4826 * median_of(norms),
                                     1e-6 * max_u);
    if (delta <= 0.0) delta = 1.0;
  }

  double cost = total_cost(graph, delta, &states);
  report.initial_cost = cost;

  // state indexing: every node except the gauge owns a 7-block
  std::vector<int> block_of(node_count, -1);
  int blocks = 0;
  for (int n = 0; n < node_count; ++n) {
    if (n != graph.gauge_node) block_of[n] = blocks++;
  }
  const int dim = 7 * blocks;

  double lambda = params.lambda_init;
  bool converged = blocks == 0 || cost == 0.0;

  Eigen::Matrix<double, 7, 7> jac_i, jac_j;
  for (int iter = 0; iter < params.max_iters && !converged; ++iter) {
    // assemble the IRLS-weighted normal equations
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(edge_count * 4 * 49);
    for (std::size_t e = 0; e < edge_count; ++e) {
      const Sim3Edge& edge = graph.edges[e];
      const double weight =
          edge.inlier_ratio * huber_weight_of_chi2(states[e].chi2, delta);
      if (weight <= 0.0) continue;
      edge_jacobians(graph.nodes[edge.from_submap],
                     graph.nodes[edge.to_submap], edge.transform, jac_i,
                     jac_j);
      const int bi = block_of[edge.from_submap];
      const int bj = block_of[edge.to_submap];
      const Sim3Tangent& r = states[e].residual;

      auto add_block = [&](int row_block, int col_block,
                           const Eigen::Matrix<double, 7, 7>& m) {
        for (int a = 0; a < 7; ++a) {
          for (int b = 0; b < 7; ++b) {
            triplets.emplace_back(7 * row_block + a, 7 * col_block + b,
                                  weight * m(a, b));
          }
        }
      };
      if (bi >= 0) {
        add_block(bi, bi, jac_i.transpose() * jac_i);
        rhs.segment<7>(7 * bi) -= weight * jac_i.transpose() * r;
      }
      if (bj >= 0) {
        add_block(bj, bj, jac_j.transpose() * jac_j);
        rhs.segment<7>(7 * bj) -= weight * jac_j.transpose() * r;
      }
      if (bi >= 0 && bj >= 0) {
        add_block(bi, bj, jac_i.transpose() * jac_j);
        add_block(bj, bi, jac_j.transpose() * jac_i);
      }
    }
    Eigen::SparseMatrix<double> hessian(dim, dim);
    hessian.setFromTriplets(triplets.begin(), triplets.end());
    const Eigen::VectorXd diagonal = hessian.diagonal();

    // damped trials; reject inflates lambda, accept shrinks it
    bool accepted = false;
    while (!accepted && lambda <= params.lambda_max) {
      Eigen::SparseMatrix<double> damped = hessian;
      for (int d = 0; d < dim; ++d) {
        damped.coeffRef(d, d) = diagonal(d) + lambda * (diagonal(d) + 1e-12);
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = solver.solve(rhs);
      if (!step.allFinite()) {
        throw NumericalFailureError("optimize_graph: non-finite step");
      }

      std::vector<Sim3> candidate = graph.nodes;
      for (int n = 0; n < node_count; ++n) {
        if (block_of[n] < 0) continue;
        const Sim3Tangent delta_n = step.segment<7>(7 * block_of[n]);
        candidate[n] = sim3_compose(sim3_exp(delta_n), candidate[n]);
      }
      PoseGraph trial = graph;
      trial.nodes = std::move(candidate);
      std::vector<EdgeState> trial_states(edge_count);
      const double trial_cost = total_cost(trial, delta, &trial_states);

      if (trial_cost <= cost) {
        const double improvement = cost - trial_cost;
        graph.nodes = std::move(trial.nodes);
        states = std::move(trial_states);
        accepted = true;
        lambda = std::max(lambda / 3.0, 1e-12);
        report.iterations = iter + 1;
        if (improvement < params.rel_cost_tol * std::max(cost, 1e-300) ||
            step.norm() < params.step_tol) {
          converged = true;
        }
        cost = trial_cost;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;  // damping exhausted; keep the best estimate
  }

  report.final_cost = cost;
  report.converged = converged;
  report.edge_residual_norms.reserve(edge_count);
  for (const EdgeState& s : states) {
    report.edge_residual_norms.push_back(s.residual.norm());
  }
  return report;
}

Trajectory compose_global_trajectory(
    const PoseGraph& graph, const std::vector<Submap>& submaps,
    const std::vector<SubmapGeometry>& geometries, double frame_dt) {
  if (submaps.size() != geometries.size() ||
      submaps.size() != graph.nodes.size()) {
    throw InvalidArgumentError(
        "compose_global_trajectory: submap/geometry/node count mismatch");
  }
  std::map<int, RigidPose> by_frame;
  for (std::size_t k = 0; k < submaps.size(); ++k) {
    const Sim3& node = graph.nodes[k];
    std::vector<int> owned = submaps[k].base.keyframes;
    owned.insert(owned.end(), submaps[k].overlap_frames.begin(),
                 submaps[k].overlap_frames.end());
    for (const int frame : owned) {
      if (by_frame.count(frame)) continue;  // earlier submap owns it
      const FrameGeometry* fg = geometries[k].find_frame(frame);
      if (fg == nullptr) {
        throw DataError("compose_global_trajectory: keyframe " +
                        std::to_string(frame) + " has no local pose");
      }
      by_frame.emplace(frame, apply_sim3_to_pose(node, fg->local_pose));
    }
  }
  Trajectory traj;
  traj.poses.reserve(by_frame.size());
  for (const auto& [frame, pose] : by_frame) {
    traj.poses.push_back({frame * frame_dt, pose});
  }
  return traj;
}

}  // namespace mslam
