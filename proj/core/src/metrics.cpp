#include "mslam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mslam/errors.hpp"
#include "mslam/umeyama.hpp"

namespace mslam {

Association associate_by_timestamp(const Trajectory& estimate,
                                   const Trajectory& reference,
                                   double max_dt) {
  estimate.validate();
  reference.validate();
  Association assoc;
  std::size_t j = 0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double ts = estimate.poses[i].timestamp;
    while (j + 1 < reference.size() &&
           std::abs(reference.poses[j + 1].timestamp - ts) <=
               std::abs(reference.poses[j].timestamp - ts)) {
      ++j;
    }
    if (j < reference.size() &&
        std::abs(reference.poses[j].timestamp - ts) <= max_dt) {
      assoc.matches.emplace_back(i, j);
      ++j;  // one-to-one: a reference pose matches at most once
      if (j >= reference.size()) {
        assoc.dropped_estimate += estimate.size() - i - 1;
        break;
      }
    } else {
      ++assoc.dropped_estimate;
    }
  }
  assoc.dropped_reference = reference.size() - assoc.matches.size();
  return assoc;
}

namespace {

std::pair<std::vector<Eigen::Vector3d>, std::vector<Eigen::Vector3d>>
matched_positions(const Trajectory& estimate, const Trajectory& reference,
                  double max_dt) {
  const Association assoc =
      associate_by_timestamp(estimate, reference, max_dt);
  std::vector<Eigen::Vector3d> est, ref;
  est.reserve(assoc.matches.size());
  ref.reserve(assoc.matches.size());
  for (const auto& [i, j] : assoc.matches) {
    est.push_back(estimate.poses[i].pose.translation);
    ref.push_back(reference.poses[j].pose.translation);
  }
  return {std::move(est), std::move(ref)};
}

}  // namespace

Sim3 align_sim3(const Trajectory& estimate, const Trajectory& reference,
                double max_dt) {
  const auto [est, ref] = matched_positions(estimate, reference, max_dt);
  if (est.size() < 3) {
    throw InsufficientCorrespondencesError(
        "align_sim3: need >= 3 matched positions, have " +
        std::to_string(est.size()));
  }
  try {
    return weighted_umeyama(est, ref);
  } catch (const DegenerateGeometryError&) {
    throw InsufficientCorrespondencesError(
        "align_sim3: matched positions are collinear");
  }
}

double ate_rmse(const Trajectory& estimate, const Trajectory& reference,
                double max_dt) {
  const Sim3 alignment = align_sim3(estimate, reference, max_dt);
  const auto [est, ref] = matched_positions(estimate, reference, max_dt);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sum_sq += (sim3_apply(alignment, est[i]) - ref[i]).squaredNorm();
  }
  return std::sqrt(sum_sq / static_cast<double>(est.size()));
}

std::vector<double> default_drift_segments() {
  return {100, 200, 300, 400, 500, 600, 700, 800};
}

DriftReport translation_drift(const Trajectory& estimate,
                              const Trajectory& reference,
                              const std::vector<double>& segment_lengths,
                              double max_dt) {
  if (segment_lengths.empty()) {
    throw InvalidArgumentError("translation_drift: no segment lengths");
  }
  const Association assoc =
      associate_by_timestamp(estimate, reference, max_dt);
  DriftReport report;
  report.matched_poses = assoc.matches.size();
  if (assoc.matches.size() < 2) return report;

  // cumulative reference arc length over the matched poses
  const std::size_t n = assoc.matches.size();
  std::vector<double> arc(n, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    const auto& prev = reference.poses[assoc.matches[m - 1].second];
    const auto& cur = reference.poses[assoc.matches[m].second];
    arc[m] = arc[m - 1] +
             (cur.pose.translation - prev.pose.translation).norm();
  }

  double error_sum = 0.0;
  std::size_t segments = 0;
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t end = start;
    for (const double length : segment_lengths) {
      while (end < n && arc[end] - arc[start] < length) ++end;
      if (end >= n) break;

      const auto& [ei, ri] = assoc.matches[start];
      const auto& [ej, rj] = assoc.matches[end];
      const RigidPose rel_ref = reference.poses[ri].pose.inverse() *
                                reference.poses[rj].pose;
      const RigidPose rel_est =
          estimate.poses[ei].pose.inverse() * estimate.poses[ej].pose;
      const double err =
          (rel_est.translation - rel_ref.translation).norm();
      error_sum += err / length;
      ++segments;
    }
  }
  report.segments_evaluated = segments;
  if (segments > 0) {
    report.drift_percent = 100.0 * error_sum / static_cast<double>(segments);
  }
  return report;
}

MetricReport evaluate_trajectory(const Trajectory& estimate,
                                 const Trajectory& reference,
                                 const std::vector<double>& segment_lengths) {
  MetricReport report;
  report.ate_rmse_m = ate_rmse(estimate, reference);
  const DriftReport drift =
      translation_drift(estimate, reference, segment_lengths);
  report.drift_pct = drift.drift_percent;
  report.matched_poses = drift.matched_poses;
  report.segments_evaluated = drift.segments_evaluated;
  return report;
}

std::string format_metric_report(const MetricReport& report) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof(buf), "ate_rmse_m=%.9f\n", report.ate_rmse_m);
  out += buf;
  if (report.drift_pct) {
    std::snprintf(buf, sizeof(buf), "drift_pct=%.9f\n", *report.drift_pct);
  } else {
    std::snprintf(buf, sizeof(buf), "drift_pct=n/a\n");
  }
  out += buf;
  std::snprintf(buf, sizeof(buf), "matched_poses=%zu\n", report.matched_poses);
  out += buf;
  std::snprintf(buf, sizeof(buf), "segments_evaluated=%zu\n",
                report.segments_evaluated);
  out += buf;
  return out;
}

}  // namespace mslam
