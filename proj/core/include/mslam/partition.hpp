#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mslam/motion.hpp"

namespace mslam {

enum class LoopReuseMode { Unidirectional, Bidirectional };

/// Partitioning and loop-retrieval thresholds. Defaults are the fixed
/// benchmark values; omega and the loop stub parameters are ours.
struct PartitionParams {
  double tau_palx = 15.0;   // px of accumulated mean flow
  int n_max = 12;           // max keyframes per linear segment
  int n_ovlp = 5;           // overlap cardinality between consecutive submaps
  int omega = 1;            // static boundary window, frames
  double loop_radius = 10.0;    // m; retrieval acceptance radius
  int loop_min_gap = 200;       // frames; minimum temporal separation
  LoopReuseMode loop_reuse_mode = LoopReuseMode::Unidirectional;
};

enum class SegmentKind { Turning, Linear, StaticBridge };

/// A base submap: strictly increasing keyframe indices plus the motion
/// regime that produced it.
struct BaseSegment {
  std::vector<int> keyframes;
  SegmentKind kind = SegmentKind::Linear;
};

/// Base segment augmented with overlap anchors shared with the next submap
/// and optional loop anchors injected from history.
struct Submap {
  int id = 0;
  BaseSegment base;
  std::vector<int> overlap_frames;  // first n_ovlp keyframes of the next base
  std::vector<int> loop_frames;     // historical keyframes, injected
  // current keyframes marked for re-inference in the historical context;
  // populated only in Bidirectional mode
  std::vector<int> bidirectional_exports;
  // historical submap owning the loop anchor, -1 when no loop
  int loop_source_submap = -1;

  /// Frame list in inference order: loop anchors first (they precede every
  /// base index), then base, then overlap.
  std::vector<int> inference_frames() const;
};

/// True iff s(t) is Static and a non-static frame lies within omega frames
/// of t, i.e. t sits at the edge of its static run.
bool is_static_boundary(std::size_t t, const std::vector<MotionState>& states,
                        int omega);

/// Two-stage single forward pass: keyframe selection (static boundaries
/// plus parallax-gated dynamic frames) followed by topology-aware slicing
/// (turning runs never split, linear runs sliced at n_max and after turns).
/// Static runs touching the sequence ends keep their outermost frames.
/// An empty sequence yields an empty result.
std::vector<BaseSegment> partition_sequence(
    std::size_t frame_count, const std::vector<MotionState>& states,
    const std::vector<double>& flow_means, const PartitionParams& params);

/// A verified loop retrieval: the current keyframe that matched, the
/// historical keyframe to inject, and the submap owning it.
struct LoopHit {
  int query_keyframe = -1;
  int historical_keyframe = -1;
  int historical_submap = -1;
};

/// Attaches overlap anchors (first n_ovlp keyframes of the next segment)
/// and loop anchors to each base segment. A next segment shorter than
/// n_ovlp shrinks the overlap and appends a warning record.
std::vector<Submap> compose_submaps(
    const std::vector<BaseSegment>& segments, const PartitionParams& params,
    const std::map<int, LoopHit>& loop_hits = {},
    std::vector<std::string>* warnings = nullptr);

/// Ground-truth-proximity loop retrieval stub: nearest historical keyframe
/// within loop_radius whose frame gap exceeds loop_min_gap. Ties break
/// toward the smaller keyframe index.
std::optional<int> retrieve_loop_candidates(
    const Eigen::Vector3d& current_position,
    const std::vector<std::pair<int, Eigen::Vector3d>>& history,
    int current_frame, const PartitionParams& params);

}  // namespace mslam
