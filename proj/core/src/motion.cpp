#include "mslam/motion.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mslam/errors.hpp"

namespace mslam {

namespace {

void check_non_empty(const FlowField& flow, const char* op) {
  if (flow.width <= 0 || flow.height <= 0 ||
      flow.fx.size() != static_cast<std::size_t>(flow.width) * flow.height ||
      flow.fy.size() != flow.fx.size()) {
    throw InvalidArgumentError(std::string(op) +
                               ": empty or inconsistent flow field");
  }
}

/// Mirror index into [0, n) by reflecting at the boundaries.
std::size_t reflect_index(long long i, long long n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return static_cast<std::size_t>(i);
}

}  // namespace

double static_ratio(const FlowField& flow, double tau_flow) {
  check_non_empty(flow, "static_ratio");
  if (!(tau_flow > 0.0)) {
    throw InvalidArgumentError("static_ratio: tau_flow must be positive");
  }
  std::size_t quasi_static = 0;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const double mag = std::hypot(flow.fx[i], flow.fy[i]);
    if (mag < tau_flow) ++quasi_static;  // strict, per the indicator
  }
  return static_cast<double>(quasi_static) / static_cast<double>(flow.size());
}

double turning_score(const FlowField& flow) {
  check_non_empty(flow, "turning_score");
  double sum = 0.0;
  for (const double v : flow.fx) sum += std::abs(v);
  return sum / static_cast<double>(flow.size());
}

double mean_flow_magnitude(const FlowField& flow) {
  check_non_empty(flow, "mean_flow_magnitude");
  double sum = 0.0;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    sum += std::hypot(flow.fx[i], flow.fy[i]);
  }
  return sum / static_cast<double>(flow.size());
}

std::vector<double> smooth_profile(const std::vector<double>& series,
                                   double sigma) {
  if (series.empty()) {
    throw InvalidArgumentError("smooth_profile: empty series");
  }
  if (sigma < 0.0) {
    throw InvalidArgumentError("smooth_profile: sigma must be >= 0");
  }
  if (sigma == 0.0) return series;

  const long long radius = static_cast<long long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (long long k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * (k / sigma) * (k / sigma));
    kernel[k + radius] = v;
    ksum += v;
  }
  for (double& v : kernel) v /= ksum;

  const long long n = static_cast<long long>(series.size());
  std::vector<double> out(series.size());
  for (long long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long long k = -radius; k <= radius; ++k) {
      acc += kernel[k + radius] * series[reflect_index(i + k, n)];
    }
    out[i] = acc;
  }
  return out;
}

std::vector<MotionState> classify_states(
    const std::vector<double>& smoothed_static,
    const std::vector<double>& smoothed_turn, const MotionParams& params) {
  if (smoothed_static.size() != smoothed_turn.size()) {
    throw InvalidArgumentError("classify_states: series length mismatch");
  }
  std::vector<MotionState> states(smoothed_static.size());
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (smoothed_static[t] > params.tau_static) {
      states[t] = MotionState::Static;
    } else if (smoothed_turn[t] > params.tau_turn) {
      states[t] = MotionState::Turning;
    } else {
      states[t] = MotionState::Linear;
    }
  }
  return states;
}

MotionProfile build_motion_profile(const std::vector<FlowStats>& stats,
                                   const MotionParams& params) {
  if (stats.empty()) {
    throw InvalidArgumentError("build_motion_profile: no flow statistics");
  }
  MotionProfile profile;
  profile.static_ratio.reserve(stats.size());
  profile.turning_score.reserve(stats.size());
  for (const FlowStats& s : stats) {
    profile.static_ratio.push_back(s.static_ratio_raw);
    profile.turning_score.push_back(s.turning_score_raw);
  }
  profile.smoothed_static =
      smooth_profile(profile.static_ratio, params.smoothing_sigma);
  profile.smoothed_turn =
      smooth_profile(profile.turning_score, params.smoothing_sigma);
  profile.states =
      classify_states(profile.smoothed_static, profile.smoothed_turn, params);
  return profile;
}

double parallax_accumulate(const std::vector<double>& flow_means,
                           std::size_t from_frame, std::size_t to_frame) {
  if (from_frame > to_frame || to_frame >= flow_means.size()) {
    throw InvalidArgumentError("parallax_accumulate: index out of range");
  }
  double acc = 0.0;
  for (std::size_t t = from_frame + 1; t <= to_frame; ++t) {
    acc += flow_means[t];
  }
  return acc;
}

std::vector<FlowStats> read_flow_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("read_flow_stats: cannot open " + path);
  }
  std::vector<FlowStats> stats;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    FlowStats s;
    char comma;
    std::istringstream ls(line);
    if (!(ls >> s.frame_index >> comma >> s.mean_flow_mag >> comma >>
          s.static_ratio_raw >> comma >> s.turning_score_raw)) {
      throw ParseError("read_flow_stats: malformed record at " + path +
                       ":" + std::to_string(line_no));
    }
    stats.push_back(s);
  }
  return stats;
}

void write_flow_stats(const std::string& path,
                      const std::vector<FlowStats>& stats) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("write_flow_stats: cannot open " + path);
  }
  out << "# frame_index, mean_flow_mag, static_ratio_raw, turning_score_raw\n";
  char buf[160];
  for (const FlowStats& s : stats) {
    std::snprintf(buf, sizeof(buf), "%d, %.17g, %.17g, %.17g\n", s.frame_index,
                  s.mean_flow_mag, s.static_ratio_raw, s.turning_score_raw);
    out << buf;
  }
}

}  // namespace mslam
