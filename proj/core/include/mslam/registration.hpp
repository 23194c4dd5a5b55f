#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mslam/geometry_provider.hpp"
#include "mslam/sim3.hpp"

namespace mslam {

enum class AnchorKind { Overlap, Loop };

/// Frames shared by two submap contexts that serve as the registration
/// pivot: a window around the overlap midpoint, or the single reused
/// historical frame.
struct AnchorSpec {
  AnchorKind kind = AnchorKind::Overlap;
  std::vector<int> frames;
};

/// Per-pixel validity: high joint confidence and not sky.
struct ValidMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;
  std::size_t count = 0;
};

enum class EdgeKind { Odometry, Loop };

/// A verified relative-transform constraint between two submaps. The
/// transform maps points in `to`'s local frame into `from`'s local frame,
/// matching the pose-graph residual convention.
struct Sim3Edge {
  int from_submap = -1;
  int to_submap = -1;
  Sim3 transform;
  double inlier_ratio = 0.0;
  EdgeKind kind = EdgeKind::Odometry;
  bool accepted = false;
};

enum class HuberDeltaMode { MadScaled, Fixed };

struct RobustEstimateParams {
  HuberDeltaMode delta_mode = HuberDeltaMode::MadScaled;
  double fixed_delta = 1.0;       // used only in Fixed mode
  int max_iters = 20;
  double rel_cost_tol = 1e-10;
  double inlier_cut_sigma = 2.5;  // inlier if r < cut * robust scale
  std::size_t min_correspondences = 10;
};

/// The estimate plus convergence diagnostics. residual_evaluations counts
/// point-residual computations; with pixel-indexed correspondence it grows
/// linearly in the mask size, never faster.
struct RegistrationResult {
  Sim3 transform;           // maps source points onto target points
  double inlier_ratio = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;  // per-iteration (before, after) pairs
  std::size_t residual_evaluations = 0;
};

/// The window frames centered on the overlap midpoint, clipped to the
/// overlap. Even-sized windows center low. Throws MissingAnchorError on an
/// empty overlap.
AnchorSpec select_overlap_anchor(const std::vector<int>& overlap_frames,
                                 int window);

/// Eq-style conjunction mask: valid iff min(conf_i, conf_j) exceeds the
/// tau_conf-quantile of that minimum over non-sky pixels, and the pixel is
/// not sky. The quantile uses lower interpolation: sorted index
/// floor(tau * (n - 1)).
ValidMask build_valid_mask(const std::vector<float>& conf_i,
                           const std::vector<float>& conf_j,
                           const std::vector<std::uint8_t>& sky, int width,
                           int height, double tau_conf);

/// Huber-IRLS similarity estimation on pre-extracted correspondences:
/// closed-form initialization, MAD-scaled Huber reweighting, weighted
/// re-solves until the relative cost change drops below tolerance.
RegistrationResult estimate_robust_sim3(
    const std::vector<Eigen::Vector3d>& points_src,
    const std::vector<Eigen::Vector3d>& points_dst,
    const RobustEstimateParams& params = {});

/// Grid front end: gathers the masked pixel-indexed correspondences of one
/// anchor frame from both contexts, then runs the IRLS core.
RegistrationResult estimate_robust_sim3(const FrameGeometry& frame_src,
                                        const FrameGeometry& frame_dst,
                                        const ValidMask& mask,
                                        const RobustEstimateParams& params = {});

/// Sets accepted = (inlier_ratio >= tau_in); the transform is never
/// touched.
Sim3Edge verify_constraint(Sim3Edge edge, double tau_in);

/// Pools every anchor frame of an edge into one IRLS problem with a single
/// shared transform. Masks are built per anchor frame with tau_conf.
struct EdgeEstimationInput {
  const SubmapGeometry* geometry_src = nullptr;
  const SubmapGeometry* geometry_dst = nullptr;
  AnchorSpec anchor;
  double tau_conf = 0.5;
};
RegistrationResult estimate_edge(const EdgeEstimationInput& input,
                                 const RobustEstimateParams& params = {});

}  // namespace mslam
