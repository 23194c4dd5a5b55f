#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mslam {

/// Dense optical flow between two consecutive frames: per-pixel horizontal
/// and vertical displacement in pixels, row-major.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> fx;
  std::vector<double> fy;

  std::size_t size() const { return fx.size(); }
};

enum class MotionState : std::uint8_t { Static, Turning, Linear };

/// Thresholds for the flow statistics and the hierarchical classifier.
/// Defaults are the fixed benchmark values.
struct MotionParams {
  double tau_flow = 0.7;     // px; quasi-static pixel cutoff
  double tau_static = 0.6;   // ratio; static-state threshold
  double tau_turn = 5.0;     // px of mean |fx|; turning-state threshold
  double smoothing_sigma = 2.0;  // frames; temporal Gaussian smoothing
};

/// Per-frame motion statistics plus their smoothed profiles and the
/// discrete state labels. All series share the frame count.
struct MotionProfile {
  std::vector<double> static_ratio;
  std::vector<double> turning_score;
  std::vector<double> smoothed_static;
  std::vector<double> smoothed_turn;
  std::vector<MotionState> states;

  std::size_t frame_count() const { return states.size(); }
};

/// One record of the flow-statistics file (and of synthetic worlds).
struct FlowStats {
  int frame_index = 0;
  double mean_flow_mag = 0.0;
  double static_ratio_raw = 0.0;
  double turning_score_raw = 0.0;
};

/// Fraction of pixels with flow magnitude strictly below tau_flow.
/// Throws InvalidArgumentError for an empty field or tau_flow <= 0.
double static_ratio(const FlowField& flow, double tau_flow);

/// Mean absolute horizontal flow; vertical flow is ignored.
double turning_score(const FlowField& flow);

/// Mean flow magnitude, the per-frame parallax contribution.
double mean_flow_magnitude(const FlowField& flow);

/// Discrete Gaussian smoothing: kernel truncated at +-ceil(3*sigma),
/// renormalized to sum 1, series reflected at the boundaries. sigma == 0
/// returns the input unchanged.
std::vector<double> smooth_profile(const std::vector<double>& series,
                                   double sigma);

/// Hierarchical cascade: Static if smoothed static ratio exceeds
/// tau_static, else Turning if the smoothed turning score exceeds
/// tau_turn, else Linear.
std::vector<MotionState> classify_states(
    const std::vector<double>& smoothed_static,
    const std::vector<double>& smoothed_turn, const MotionParams& params);

/// Smooths the raw series and classifies states in one pass.
MotionProfile build_motion_profile(const std::vector<FlowStats>& stats,
                                   const MotionParams& params);

/// Accumulated mean flow magnitude over frames (from, to]. Monotone
/// non-decreasing in `to` and additive over adjacent intervals.
double parallax_accumulate(const std::vector<double>& flow_means,
                           std::size_t from_frame, std::size_t to_frame);

/// Flow-statistics file: CSV records
/// `frame_index,mean_flow_mag,static_ratio_raw,turning_score_raw`,
/// `#` starts a comment line.
std::vector<FlowStats> read_flow_stats(const std::string& path);
void write_flow_stats(const std::string& path,
                      const std::vector<FlowStats>& stats);

}  // namespace mslam
