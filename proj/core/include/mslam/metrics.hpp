#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mslam/sim3.hpp"
#include "mslam/trajectory.hpp"

namespace mslam {

/// Pairs of pose indices (estimate, reference) associated by nearest
/// timestamp within the window, one-to-one.
struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::size_t dropped_estimate = 0;
  std::size_t dropped_reference = 0;
};

Association associate_by_timestamp(const Trajectory& estimate,
                                   const Trajectory& reference,
                                   double max_dt = 0.05);

/// Global Sim(3) mapping the estimate onto the reference over matched
/// positions (uniform-weight closed form). Needs >= 3 matched non-collinear
/// positions; throws InsufficientCorrespondencesError otherwise.
Sim3 align_sim3(const Trajectory& estimate, const Trajectory& reference,
                double max_dt = 0.05);

/// RMSE of position residuals after applying align_sim3 to the estimate.
double ate_rmse(const Trajectory& estimate, const Trajectory& reference,
                double max_dt = 0.05);

/// Default evaluation arc lengths in meters.
std::vector<double> default_drift_segments();

/// Relative-segment translation drift: for each start pose and each
/// segment length, the translation error of the estimate's relative pose
/// over the reference-arc-length segment divided by that length, averaged
/// and reported in percent. Returns nullopt when the trajectory is shorter
/// than the smallest segment (not applicable, distinct from zero drift).
struct DriftReport {
  std::optional<double> drift_percent;
  std::size_t segments_evaluated = 0;
  std::size_t matched_poses = 0;
};
DriftReport translation_drift(
    const Trajectory& estimate, const Trajectory& reference,
    const std::vector<double>& segment_lengths = default_drift_segments(),
    double max_dt = 0.05);

/// Full evaluation: ATE plus drift plus association counts.
struct MetricReport {
  double ate_rmse_m = 0.0;
  std::optional<double> drift_pct;
  std::size_t matched_poses = 0;
  std::size_t segments_evaluated = 0;
};
MetricReport evaluate_trajectory(
    const Trajectory& estimate, const Trajectory& reference,
    const std::vector<double>& segment_lengths = default_drift_segments());

/// Flat key-value serialization (`ate_rmse_m=...` etc.).
std::string format_metric_report(const MetricReport& report);

}  // namespace mslam
