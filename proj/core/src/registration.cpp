#include "mslam/registration.hpp"

#include <algorithm>
#include <cmath>

#include "mslam/errors.hpp"
#include "mslam/umeyama.hpp"

namespace mslam {

namespace {

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  std::nth_element(values.begin(), values.begin() + n / 2, values.end());
  double med = values[n / 2];
  if (n % 2 == 0) {
    const auto lower = std::max_element(values.begin(), values.begin() + n / 2);
    med = 0.5 * (med + *lower);
  }
  return med;
}

double huber_cost(const std::vector<double>& residuals, double delta) {
  double cost = 0.0;
  for (const double r : residuals) {
    const double r2 = r * r;
    cost += r <= delta ? r2 : 2.0 * delta * r - delta * delta;
  }
  return cost;
}

}  // namespace

AnchorSpec select_overlap_anchor(const std::vector<int>& overlap_frames,
                                 int window) {
  if (overlap_frames.empty()) {
    throw MissingAnchorError("select_overlap_anchor: empty overlap");
  }
  if (window < 1) {
    throw InvalidArgumentError("select_overlap_anchor: window must be >= 1");
  }
  const int n = static_cast<int>(overlap_frames.size());
  const int mid = (n - 1) / 2;
  int start = mid - (window - 1) / 2;  // even windows center low
  start = std::clamp(start, 0, std::max(0, n - window));
  const int end = std::min(n, start + window);

  AnchorSpec spec;
  spec.kind = AnchorKind::Overlap;
  spec.frames.assign(overlap_frames.begin() + start,
                     overlap_frames.begin() + end);
  return spec;
}

ValidMask build_valid_mask(const std::vector<float>& conf_i,
                           const std::vector<float>& conf_j,
                           const std::vector<std::uint8_t>& sky, int width,
                           int height, double tau_conf) {
  const std::size_t px = static_cast<std::size_t>(width) * height;
  if (conf_i.size() != px || conf_j.size() != px || sky.size() != px) {
    throw InvalidArgumentError("build_valid_mask: grid size mismatch");
  }
  if (!(tau_conf > 0.0) || !(tau_conf < 1.0)) {
    throw InvalidArgumentError("build_valid_mask: tau_conf must lie in (0,1)");
  }

  ValidMask mask;
  mask.width = width;
  mask.height = height;
  mask.valid.assign(px, 0);

  std::vector<float> joint(px);
  std::vector<float> non_sky;
  non_sky.reserve(px);
  for (std::size_t i = 0; i < px; ++i) {
    joint[i] = std::min(conf_i[i], conf_j[i]);
    if (!sky[i]) non_sky.push_back(joint[i]);
  }
  if (non_sky.empty()) return mask;  // all sky: empty mask, caller decides

  const std::size_t idx = static_cast<std::size_t>(
      std::floor(tau_conf * static_cast<double>(non_sky.size() - 1)));
  std::nth_element(non_sky.begin(), non_sky.begin() + idx, non_sky.end());
  const float quantile = non_sky[idx];

  for (std::size_t i = 0; i < px; ++i) {
    if (!sky[i] && joint[i] > quantile) {
      mask.valid[i] = 1;
      ++mask.count;
    }
  }
  return mask;
}

RegistrationResult estimate_robust_sim3(
    const std::vector<Eigen::Vector3d>& points_src,
    const std::vector<Eigen::Vector3d>& points_dst,
    const RobustEstimateParams& params) {
  const std::size_t n = points_src.size();
  if (points_dst.size() != n) {
    throw InvalidArgumentError("estimate_robust_sim3: size mismatch");
  }
  if (n < params.min_correspondences) {
    throw InsufficientCorrespondencesError(
        "estimate_robust_sim3: " + std::to_string(n) + " correspondences, need " +
        std::to_string(params.min_correspondences));
  }

  RegistrationResult result;
  std::vector<double> weights(n, 1.0);
  std::vector<double> residuals(n);

  // robust-scale floor keeps exact fits well defined
  double dst_scale = 0.0;
  for (const auto& p : points_dst) dst_scale = std::max(dst_scale, p.norm());
  const double scale_floor = std::max(1e-12 * dst_scale, 1e-300);

  result.transform = weighted_umeyama(points_src, points_dst, weights);

  auto compute_residuals = [&](const Sim3& transform) {
    for (std::size_t i = 0; i < n; ++i) {
      residuals[i] = (sim3_apply(transform, points_src[i]) - points_dst[i]).norm();
    }
    result.residual_evaluations += n;
  };

  compute_residuals(result.transform);
  double sigma = 0.0;
  for (int iter = 0; iter < params.max_iters; ++iter) {
    sigma = std::max(1.4826 * median_of(residuals), scale_floor);
    const double delta = params.delta_mode == HuberDeltaMode::MadScaled
                             ? 1.345 * sigma
                             : params.fixed_delta;

    const double cost_before = huber_cost(residuals, delta);
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = residuals[i] <= delta ? 1.0 : delta / residuals[i];
    }
    const Sim3 candidate = weighted_umeyama(points_src, points_dst, weights);
    compute_residuals(candidate);
    const double cost_after = huber_cost(residuals, delta);

    result.cost_history.push_back(cost_before);
    result.cost_history.push_back(cost_after);
    result.transform = candidate;
    result.iterations = iter + 1;

    // the weighted solve minimizes the majorizer, so the fixed-delta cost
    // never increases; convergence on relative change
    if (cost_before <= 0.0 ||
        std::abs(cost_before - cost_after) <
            params.rel_cost_tol * std::max(cost_before, scale_floor)) {
      result.converged = true;
      break;
    }
  }

  const double cut = params.inlier_cut_sigma * sigma;
  std::size_t inliers = 0;
  for (const double r : residuals) {
    if (r < cut) ++inliers;
  }
  result.inlier_ratio = static_cast<double>(inliers) / static_cast<double>(n);
  return result;
}

RegistrationResult estimate_robust_sim3(const FrameGeometry& frame_src,
                                        const FrameGeometry& frame_dst,
                                        const ValidMask& mask,
                                        const RobustEstimateParams& params) {
  const std::size_t px = mask.valid.size();
  if (frame_src.points.size() != px || frame_dst.points.size() != px) {
    throw InvalidArgumentError("estimate_robust_sim3: grid/mask size mismatch");
  }
  std::vector<Eigen::Vector3d> src, dst;
  src.reserve(mask.count);
  dst.reserve(mask.count);
  for (std::size_t i = 0; i < px; ++i) {
    if (!mask.valid[i]) continue;
    src.push_back(frame_src.points[i].cast<double>());
    dst.push_back(frame_dst.points[i].cast<double>());
  }
  return estimate_robust_sim3(src, dst, params);
}

Sim3Edge verify_constraint(Sim3Edge edge, double tau_in) {
  edge.accepted = edge.inlier_ratio >= tau_in;
  return edge;
}

RegistrationResult estimate_edge(const EdgeEstimationInput& input,
                                 const RobustEstimateParams& params) {
  if (input.geometry_src == nullptr || input.geometry_dst == nullptr) {
    throw InvalidArgumentError("estimate_edge: missing geometry");
  }
  if (input.anchor.frames.empty()) {
    throw MissingAnchorError("estimate_edge: anchor has no frames");
  }

  std::vector<Eigen::Vector3d> src, dst;
  for (const int frame_id : input.anchor.frames) {
    const FrameGeometry* fs = input.geometry_src->find_frame(frame_id);
    const FrameGeometry* fd = input.geometry_dst->find_frame(frame_id);
    if (fs == nullptr || fd == nullptr) {
      throw InvalidArgumentError("estimate_edge: anchor frame " +
                                 std::to_string(frame_id) +
                                 " missing from a context");
    }
    const ValidMask mask =
        build_valid_mask(fs->confidence, fd->confidence, fs->sky,
                         input.geometry_src->width, input.geometry_src->height,
                         input.tau_conf);
    for (std::size_t i = 0; i < mask.valid.size(); ++i) {
      if (!mask.valid[i]) continue;
      src.push_back(fs->points[i].cast<double>());
      dst.push_back(fd->points[i].cast<double>());
    }
  }
  return estimate_robust_sim3(src, dst, params);
}

}  // namespace mslam
