#include "mslam/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mslam/errors.hpp"

namespace mslam {

std::vector<int> Submap::inference_frames() const {
  std::vector<int> frames;
  frames.reserve(loop_frames.size() + base.keyframes.size() +
                 overlap_frames.size());
  frames.insert(frames.end(), loop_frames.begin(), loop_frames.end());
  frames.insert(frames.end(), base.keyframes.begin(), base.keyframes.end());
  frames.insert(frames.end(), overlap_frames.begin(), overlap_frames.end());
  return frames;
}

bool is_static_boundary(std::size_t t, const std::vector<MotionState>& states,
                        int omega) {
  if (t >= states.size()) {
    throw InvalidArgumentError("is_static_boundary: frame out of range");
  }
  if (states[t] != MotionState::Static) return false;
  const long long n = static_cast<long long>(states.size());
  const long long ti = static_cast<long long>(t);
  for (long long d = 1; d <= omega; ++d) {
    if (ti - d >= 0 && states[ti - d] != MotionState::Static) return true;
    if (ti + d < n && states[ti + d] != MotionState::Static) return true;
  }
  return false;
}

std::vector<BaseSegment> partition_sequence(
    std::size_t frame_count, const std::vector<MotionState>& states,
    const std::vector<double>& flow_means, const PartitionParams& params) {
  if (frame_count == 0) return {};
  if (states.size() != frame_count || flow_means.size() != frame_count) {
    throw InvalidArgumentError("partition_sequence: series length mismatch");
  }
  if (params.n_max < 2 || params.n_ovlp < 1 || params.n_ovlp >= params.n_max ||
      params.omega < 1) {
    throw InvalidArgumentError("partition_sequence: invalid parameters");
  }

  std::vector<BaseSegment> segments;
  BaseSegment current;
  bool current_has_turning = false;
  bool current_has_dynamic = false;

  auto finalize = [&]() {
    if (current.keyframes.empty()) return;
    current.kind = current_has_turning ? SegmentKind::Turning
                   : current_has_dynamic ? SegmentKind::Linear
                                         : SegmentKind::StaticBridge;
    segments.push_back(std::move(current));
    current = BaseSegment{};
    current_has_turning = false;
    current_has_dynamic = false;
  };

  const long long n = static_cast<long long>(frame_count);
  std::size_t last_keyframe = 0;  // parallax reference, frame 0 initially
  MotionState prev_state = states[0];

  for (std::size_t t = 0; t < frame_count; ++t) {
    bool selected = false;
    if (states[t] == MotionState::Static) {
      // boundary frames only; sequence ends count as transitions so that
      // runs touching them keep their outermost frames
      const bool at_sequence_edge =
          static_cast<long long>(t) < params.omega ||
          static_cast<long long>(t) >= n - params.omega;
      if (is_static_boundary(t, states, params.omega) || at_sequence_edge) {
        selected = true;
      }
    } else {
      if (parallax_accumulate(flow_means, last_keyframe, t) > params.tau_palx) {
        selected = true;
      }
    }
    if (selected) {
      if (states[t] == MotionState::Turning) {
        current.keyframes.push_back(static_cast<int>(t));
        current_has_turning = true;
      } else {
        if (static_cast<int>(current.keyframes.size()) >= params.n_max ||
            prev_state == MotionState::Turning) {
          finalize();
        }
        current.keyframes.push_back(static_cast<int>(t));
        if (states[t] != MotionState::Static) current_has_dynamic = true;
      }
      last_keyframe = t;  // selection resets the parallax accumulator
    }
    prev_state = states[t];
  }
  finalize();
  return segments;
}

std::vector<Submap> compose_submaps(const std::vector<BaseSegment>& segments,
                                    const PartitionParams& params,
                                    const std::map<int, LoopHit>& loop_hits,
                                    std::vector<std::string>* warnings) {
  for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
    if (segments[k].keyframes.empty() || segments[k + 1].keyframes.empty() ||
        segments[k].keyframes.back() >= segments[k + 1].keyframes.front()) {
      throw InvalidArgumentError("compose_submaps: segments must be ordered and disjoint");
    }
  }

  std::vector<Submap> submaps(segments.size());
  for (std::size_t k = 0; k < segments.size(); ++k) {
    Submap& sm = submaps[k];
    sm.id = static_cast<int>(k);
    sm.base = segments[k];

    if (k + 1 < segments.size()) {
      const auto& next = segments[k + 1].keyframes;
      int take = params.n_ovlp;
      if (static_cast<int>(next.size()) < take) {
        take = static_cast<int>(next.size());
        if (warnings) {
          warnings->push_back("submap " + std::to_string(k) +
                              ": overlap shrunk to " + std::to_string(take) +
                              " (next segment too short)");
        }
      }
      sm.overlap_frames.assign(next.begin(), next.begin() + take);
    }

    const auto hit = loop_hits.find(static_cast<int>(k));
    if (hit != loop_hits.end()) {
      const LoopHit& lh = hit->second;
      if (lh.historical_keyframe >= sm.base.keyframes.front()) {
        throw InvalidArgumentError(
            "compose_submaps: loop frame must precede every base index");
      }
      sm.loop_frames.push_back(lh.historical_keyframe);
      sm.loop_source_submap = lh.historical_submap;
      if (params.loop_reuse_mode == LoopReuseMode::Bidirectional) {
        sm.bidirectional_exports.push_back(lh.query_keyframe);
      }
    }
  }
  return submaps;
}

std::optional<int> retrieve_loop_candidates(
    const Eigen::Vector3d& current_position,
    const std::vector<std::pair<int, Eigen::Vector3d>>& history,
    int current_frame, const PartitionParams& params) {
  if (!current_position.allFinite()) {
    throw InvalidArgumentError("retrieve_loop_candidates: non-finite position");
  }
  std::optional<int> best;
  double best_dist = params.loop_radius;
  for (const auto& [keyframe, position] : history) {
    if (!position.allFinite()) {
      throw InvalidArgumentError("retrieve_loop_candidates: non-finite history");
    }
    if (current_frame - keyframe <= params.loop_min_gap) continue;
    const double dist = (position - current_position).norm();
    if (dist >= params.loop_radius) continue;
    if (dist < best_dist || (dist == best_dist && (!best || keyframe < *best))) {
      best = keyframe;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace mslam
