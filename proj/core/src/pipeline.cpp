#include "mslam/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <thread>

#include "mslam/errors.hpp"
#include "mslam/pointmap_io.hpp"

namespace mslam {

namespace {

namespace fs = std::filesystem;

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Turning:
      return "turning";
    case SegmentKind::Linear:
      return "linear";
    case SegmentKind::StaticBridge:
      return "static_bridge";
  }
  return "unknown";
}

PipelineMode parse_mode(const std::string& text) {
  if (text == "synthetic") return PipelineMode::Synthetic;
  if (text == "replay") return PipelineMode::Replay;
  throw InvalidArgumentError("config: pipeline.mode must be synthetic|replay");
}

LoopMode parse_loop_mode(const std::string& text) {
  if (text == "uni") return LoopMode::Unidirectional;
  if (text == "bi") return LoopMode::Bidirectional;
  if (text == "off") return LoopMode::Off;
  throw InvalidArgumentError("config: pipeline.loop_mode must be uni|bi|off");
}

TrajectoryFormat parse_format(const std::string& text) {
  if (text == "tum") return TrajectoryFormat::TUM;
  if (text == "kitti") return TrajectoryFormat::KITTI;
  throw InvalidArgumentError("config: pipeline.out_format must be tum|kitti");
}

/// Runs jobs [0, count) across a small worker pool; exceptions are
/// captured per job and the lowest-index one is rethrown after join.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& job) {
  if (count == 0) return;
  const int n_threads =
      std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1)) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct ArtifactTracker {
  std::vector<std::string> written;

  void note(const std::string& path) { written.push_back(path); }

  void mark_partial() {
    for (const std::string& path : written) {
      std::error_code ec;
      if (fs::exists(path, ec)) fs::rename(path, path + ".partial", ec);
    }
  }
};

std::map<int, LoopHit> read_loop_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("loop candidates: cannot open " + path);
  std::map<int, LoopHit> hits;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    int submap;
    LoopHit hit;
    char comma;
    if (!(ls >> submap >> comma >> hit.query_keyframe >> comma >>
          hit.historical_keyframe >> comma >> hit.historical_submap)) {
      throw ParseError("loop candidates: malformed record at " + path + ":" +
                       std::to_string(line_no));
    }
    hits[submap] = hit;
  }
  return hits;
}

void write_loop_candidates(const std::string& path,
                           const std::map<int, LoopHit>& hits) {
  std::ofstream out(path);
  if (!out) throw ParseError("loop candidates: cannot open " + path);
  out << "# submap_id, query_keyframe, historical_keyframe, historical_submap\n";
  for (const auto& [submap, hit] : hits) {
    out << submap << ", " << hit.query_keyframe << ", "
        << hit.historical_keyframe << ", " << hit.historical_submap << "\n";
  }
}

std::string partition_report_csv(const std::vector<Submap>& submaps) {
  std::string csv =
      "# submap_id, kind, first_kf, last_kf, n_keyframes, n_overlap, "
      "loop_frame_or_-1\n";
  char buf[160];
  for (const Submap& sm : submaps) {
    const int loop_frame = sm.loop_frames.empty() ? -1 : sm.loop_frames.front();
    std::snprintf(buf, sizeof(buf), "%d, %s, %d, %d, %zu, %zu, %d\n", sm.id,
                  to_string(sm.base.kind), sm.base.keyframes.front(),
                  sm.base.keyframes.back(), sm.base.keyframes.size(),
                  sm.overlap_frames.size(), loop_frame);
    csv += buf;
  }
  return csv;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path);
  out << text;
}

std::string edge_dump_csv(const std::vector<Sim3Edge>& edges) {
  std::string csv = "# from,to,kind,s,qx,qy,qz,qw,tx,ty,tz,inlier_ratio,accepted\n";
  char buf[512];
  for (const Sim3Edge& e : edges) {
    Eigen::Quaterniond q = e.transform.rotation.quaternion();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    const Eigen::Vector3d& t = e.transform.translation;
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.9f,%d\n",
                  e.from_submap, e.to_submap,
                  e.kind == EdgeKind::Odometry ? "odometry" : "loop",
                  e.transform.scale, q.x(), q.y(), q.z(), q.w(), t.x(), t.y(),
                  t.z(), e.inlier_ratio, e.accepted ? 1 : 0);
    csv += buf;
  }
  return csv;
}

std::string graph_dump_csv(const PoseGraph& graph) {
  std::string csv = "# submap_id,s,qx,qy,qz,qw,tx,ty,tz\n";
  char buf[512];
  for (std::size_t k = 0; k < graph.nodes.size(); ++k) {
    const Sim3& x = graph.nodes[k];
    Eigen::Quaterniond q = x.rotation.quaternion();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", k,
                  x.scale, q.x(), q.y(), q.z(), q.w(), x.translation.x(),
                  x.translation.y(), x.translation.z());
    csv += buf;
  }
  return csv;
}

std::string optimize_report_text(const OptimizeReport& report) {
  char buf[256];
  std::string text;
  std::snprintf(buf, sizeof(buf), "initial_cost=%.17g\n", report.initial_cost);
  text += buf;
  std::snprintf(buf, sizeof(buf), "final_cost=%.17g\n", report.final_cost);
  text += buf;
  std::snprintf(buf, sizeof(buf), "iterations=%d\n", report.iterations);
  text += buf;
  std::snprintf(buf, sizeof(buf), "converged=%d\n", report.converged ? 1 : 0);
  text += buf;
  return text;
}

/// Everything stage 1 produces, whichever mode ran.
struct PipelineInputs {
  std::vector<FlowStats> stats;
  double frame_dt = 0.1;
  std::unique_ptr<GroundTruthWorld> world;  // synthetic only
  std::unique_ptr<SyntheticGeometryProvider> synthetic_provider;
  std::unique_ptr<ReplayGeometryProvider> replay_provider;
  std::unique_ptr<RecordingGeometryProvider> recorder;
  std::map<int, LoopHit> file_loop_hits;  // replay only
  std::string reference_path;             // for the evaluation stage

  GeometryProvider& provider() {
    if (recorder) return *recorder;
    if (replay_provider) return *replay_provider;
    return *synthetic_provider;
  }
};

PipelineInputs prepare_inputs(const PipelineConfig& config,
                              const std::string& replay_out_dir) {
  PipelineInputs inputs;
  if (config.mode == PipelineMode::Synthetic) {
    WorldConfig world_config = config.world;
    world_config.seed = config.seed;
    world_config.tau_flow = config.motion.tau_flow;
    inputs.world = std::make_unique<GroundTruthWorld>(
        generate_world(world_config));
    inputs.stats = inputs.world->flow_stats;
    inputs.frame_dt = world_config.frame_dt;
    inputs.synthetic_provider = std::make_unique<SyntheticGeometryProvider>(
        *inputs.world, config.corruption, config.seed);
    if (config.record_geometry) {
      inputs.recorder = std::make_unique<RecordingGeometryProvider>(
          *inputs.synthetic_provider, replay_out_dir);
    }
  } else {
    if (config.replay_dir.empty()) {
      throw InvalidArgumentError("replay mode requires replay.dir");
    }
    inputs.stats = read_flow_stats(config.replay_dir + "/flow_stats.csv");
    inputs.frame_dt = config.replay_frame_dt;
    inputs.replay_provider =
        std::make_unique<ReplayGeometryProvider>(config.replay_dir);
    const std::string hits_path = config.replay_dir + "/loop_candidates.csv";
    if (fs::exists(hits_path)) {
      inputs.file_loop_hits = read_loop_candidates(hits_path);
    }
    inputs.reference_path = config.reference_trajectory;
  }
  return inputs;
}

/// Ground-truth-proximity loop retrieval over the partitioned segments.
std::map<int, LoopHit> retrieve_loops(const std::vector<BaseSegment>& segments,
                                      const GroundTruthWorld& world,
                                      const PartitionParams& params) {
  std::map<int, LoopHit> hits;
  std::vector<std::pair<int, Eigen::Vector3d>> history;
  std::vector<int> keyframe_segment;  // parallel to history

  for (std::size_t k = 0; k < segments.size(); ++k) {
    for (const int f : segments[k].keyframes) {
      const auto candidate = retrieve_loop_candidates(
          world.gt_trajectory[f].translation, history, f, params);
      if (candidate && !hits.count(static_cast<int>(k))) {
        // find the owning segment of the historical keyframe
        int owner = -1;
        for (std::size_t i = 0; i < history.size(); ++i) {
          if (history[i].first == *candidate) {
            owner = keyframe_segment[i];
            break;
          }
        }
        hits[static_cast<int>(k)] = LoopHit{f, *candidate, owner};
      }
    }
    for (const int f : segments[k].keyframes) {
      history.emplace_back(f, world.gt_trajectory[f].translation);
      keyframe_segment.push_back(static_cast<int>(k));
    }
  }
  return hits;
}

struct EdgeJob {
  int from = -1;
  int to = -1;
  EdgeKind kind = EdgeKind::Odometry;
  AnchorSpec anchor;
  const SubmapGeometry* src = nullptr;
  const SubmapGeometry* dst = nullptr;
};

}  // namespace

std::vector<TrajectoryPrimitive> parse_trajectory_spec(
    const std::string& spec) {
  std::vector<TrajectoryPrimitive> primitives;
  std::istringstream in(spec);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    std::istringstream ts(token);
    std::string kind;
    std::getline(ts, kind, ':');
    std::vector<double> args;
    std::string arg;
    while (std::getline(ts, arg, ':')) {
      try {
        args.push_back(std::stod(arg));
      } catch (const std::exception&) {
        throw ParseError("trajectory spec: bad number '" + arg + "'");
      }
    }
    if (kind == "straight" && args.size() == 2) {
      primitives.push_back(
          StraightSegment{args[0], static_cast<int>(args[1])});
    } else if (kind == "arc" && args.size() == 3) {
      primitives.push_back(
          ArcSegment{args[0], args[1], static_cast<int>(args[2])});
    } else if (kind == "stop" && args.size() == 1) {
      primitives.push_back(Stop{static_cast<int>(args[0])});
    } else {
      throw ParseError("trajectory spec: bad primitive '" + token + "'");
    }
  }
  if (primitives.empty()) {
    throw ParseError("trajectory spec: no primitives in '" + spec + "'");
  }
  return primitives;
}

PipelineConfig parse_pipeline_config(const KeyValueConfig& kv) {
  PipelineConfig c;
  c.mode = parse_mode(kv.get_string("pipeline.mode", "synthetic"));
  c.loop_mode = parse_loop_mode(kv.get_string("pipeline.loop_mode", "uni"));
  c.seed = kv.get_uint64("pipeline.seed", 1);
  c.workers = kv.get_int("pipeline.workers", 1);
  c.out_dir = kv.get_string("pipeline.out_dir", "out");
  c.output_format = parse_format(kv.get_string("pipeline.out_format", "tum"));
  c.record_geometry = kv.get_bool("pipeline.record_geometry", false);

  const std::string traj = kv.get_string(
      "world.trajectory", "straight:250:167,arc:48:1.5708:8,straight:250:167,"
                          "arc:48:1.5708:8,straight:250:167,arc:48:1.5708:8,"
                          "straight:250:167,arc:48:1.5708:8");
  c.world.trajectory = parse_trajectory_spec(traj);
  c.world.image_width = kv.get_int("world.image_width", 64);
  c.world.image_height = kv.get_int("world.image_height", 48);
  c.world.depth_min_m = kv.get_double("world.depth_min_m", 4.0);
  c.world.depth_max_m = kv.get_double("world.depth_max_m", 30.0);
  c.world.sky_band_rows = kv.get_int("world.sky_band_rows", 6);
  c.world.frame_dt = kv.get_double("world.frame_dt", 0.1);

  c.corruption.gauge_scale_sigma =
      kv.get_double("corruption.gauge_scale_sigma", 0.0);
  c.corruption.gauge_rot_max = kv.get_double("corruption.gauge_rot_max", 0.0);
  c.corruption.gauge_trans_sigma =
      kv.get_double("corruption.gauge_trans_sigma", 0.0);
  c.corruption.point_noise_rel =
      kv.get_double("corruption.point_noise_rel", 0.0);
  c.corruption.outlier_fraction =
      kv.get_double("corruption.outlier_fraction", 0.0);
  c.corruption.context_bias_beta =
      kv.get_double("corruption.context_bias_beta", 0.0);
  c.corruption.confidence_noise =
      kv.get_double("corruption.confidence_noise", 0.0);
  c.corruption.validate();

  c.replay_dir = kv.get_string("replay.dir", "");
  c.reference_trajectory = kv.get_string("replay.reference", "");
  c.replay_frame_dt = kv.get_double("replay.frame_dt", 0.1);

  c.motion.tau_flow = kv.get_double("motion.tau_flow", 0.7);
  c.motion.tau_static = kv.get_double("motion.tau_static", 0.6);
  c.motion.tau_turn = kv.get_double("motion.tau_turn", 5.0);
  c.motion.smoothing_sigma = kv.get_double("motion.smoothing_sigma", 2.0);

  c.partition.tau_palx = kv.get_double("partition.tau_palx", 15.0);
  c.partition.n_max = kv.get_int("partition.n_max", 12);
  c.partition.n_ovlp = kv.get_int("partition.n_ovlp", 5);
  c.partition.omega = kv.get_int("partition.omega", 1);
  c.partition.loop_radius = kv.get_double("partition.loop_radius", 10.0);
  c.partition.loop_min_gap = kv.get_int("partition.loop_min_gap", 200);
  c.partition.loop_reuse_mode = c.loop_mode == LoopMode::Bidirectional
                                    ? LoopReuseMode::Bidirectional
                                    : LoopReuseMode::Unidirectional;

  c.registration.tau_conf = kv.get_double("registration.tau_conf", 0.5);
  c.registration.tau_in = kv.get_double("registration.tau_in", 0.5);
  c.registration.anchor_window = kv.get_int("registration.anchor_window", 3);
  c.registration.max_iters = kv.get_int("registration.max_iters", 20);
  const std::string huber_mode =
      kv.get_string("registration.huber_mode", "mad");
  if (huber_mode == "mad") {
    c.registration.huber_mode = HuberDeltaMode::MadScaled;
  } else if (huber_mode == "fixed") {
    c.registration.huber_mode = HuberDeltaMode::Fixed;
  } else {
    throw InvalidArgumentError("config: registration.huber_mode must be mad|fixed");
  }
  c.registration.huber_fixed_delta =
      kv.get_double("registration.huber_fixed_delta", 1.0);

  c.lm.max_iters = kv.get_int("posegraph.max_iters", 100);
  c.lm.rel_cost_tol = kv.get_double("posegraph.rel_cost_tol", 1e-10);
  c.lm.step_tol = kv.get_double("posegraph.step_tol", 1e-12);
  c.lm.huber_delta = kv.get_double("posegraph.huber_delta", 1.0);

  c.bi_contamination = kv.get_double("loop.bi_contamination", 1.0);

  kv.throw_on_unread();
  return c;
}

std::string format_pipeline_report(const PipelineReport& report) {
  char buf[256];
  std::string text;
  for (const StageTiming& st : report.stage_times) {
    std::snprintf(buf, sizeof(buf), "stage.%s_s=%.6f\n", st.stage.c_str(),
                  st.seconds);
    text += buf;
  }
  std::snprintf(buf, sizeof(buf), "frames=%zu\n", report.frame_count);
  text += buf;
  std::snprintf(buf, sizeof(buf), "keyframes=%zu\n", report.keyframe_count);
  text += buf;
  std::snprintf(buf, sizeof(buf), "submaps=%zu\n", report.submap_count);
  text += buf;
  std::snprintf(buf, sizeof(buf), "edges_total=%zu\n", report.edges_total);
  text += buf;
  std::snprintf(buf, sizeof(buf), "edges_accepted=%zu\n",
                report.edges_accepted);
  text += buf;
  std::snprintf(buf, sizeof(buf), "edges_rejected=%zu\n",
                report.edges_rejected);
  text += buf;
  std::snprintf(buf, sizeof(buf), "optimize.initial_cost=%.17g\n",
                report.optimize.initial_cost);
  text += buf;
  std::snprintf(buf, sizeof(buf), "optimize.final_cost=%.17g\n",
                report.optimize.final_cost);
  text += buf;
  if (report.metrics) {
    text += format_metric_report(*report.metrics);
  }
  for (const std::string& artifact : report.artifacts) {
    text += "artifact=" + artifact + "\n";
  }
  for (const std::string& warning : report.warnings) {
    text += "warning=" + warning + "\n";
  }
  return text;
}

std::string run_partition_stage(const PipelineConfig& config,
                                const std::string& out_path) {
  PipelineInputs inputs = prepare_inputs(config, "");
  const MotionProfile profile = build_motion_profile(inputs.stats, config.motion);
  std::vector<double> means;
  means.reserve(inputs.stats.size());
  for (const FlowStats& s : inputs.stats) means.push_back(s.mean_flow_mag);
  const auto segments = partition_sequence(inputs.stats.size(), profile.states,
                                           means, config.partition);
  std::map<int, LoopHit> hits;
  if (config.loop_mode != LoopMode::Off) {
    if (inputs.world) {
      hits = retrieve_loops(segments, *inputs.world, config.partition);
    } else {
      hits = inputs.file_loop_hits;
    }
  }
  const auto submaps = compose_submaps(segments, config.partition, hits);
  const std::string csv = partition_report_csv(submaps);
  if (!out_path.empty()) {
    const fs::path parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_text(out_path, csv);
  }
  return csv;
}

PipelineReport run_pipeline(const PipelineConfig& config) {
  PipelineReport report;
  ArtifactTracker artifacts;
  std::string current_stage = "setup";

  const fs::path out_dir(config.out_dir);
  fs::create_directories(out_dir);
  const std::string replay_bundle = (out_dir / "replay").string();

  using clock = std::chrono::steady_clock;
  auto timed = [&](const char* stage, auto&& fn) {
    current_stage = stage;
    const auto t0 = clock::now();
    fn();
    const double seconds =
        std::chrono::duration<double>(clock::now() - t0).count();
    report.stage_times.push_back({stage, seconds});
  };

  try {
    // stage 1: inputs (world synthesis or replay bundle)
    PipelineInputs inputs;
    timed("input", [&] { inputs = prepare_inputs(config, replay_bundle); });
    report.frame_count = inputs.stats.size();

    // stage 2: motion analysis
    MotionProfile profile;
    timed("motion", [&] {
      profile = build_motion_profile(inputs.stats, config.motion);
    });

    // stage 3: partitioning and submap composition
    std::vector<BaseSegment> segments;
    std::vector<Submap> submaps;
    std::map<int, LoopHit> loop_hits;
    timed("partition", [&] {
      std::vector<double> means;
      means.reserve(inputs.stats.size());
      for (const FlowStats& s : inputs.stats) means.push_back(s.mean_flow_mag);
      segments = partition_sequence(inputs.stats.size(), profile.states, means,
                                    config.partition);
      if (segments.empty()) {
        throw InvalidArgumentError("partition produced no segments");
      }
      if (config.loop_mode != LoopMode::Off) {
        loop_hits = inputs.world
                        ? retrieve_loops(segments, *inputs.world,
                                         config.partition)
                        : inputs.file_loop_hits;
      }
      submaps =
          compose_submaps(segments, config.partition, loop_hits,
                          &report.warnings);
    });
    report.submap_count = submaps.size();
    for (const Submap& sm : submaps) {
      report.keyframe_count += sm.base.keyframes.size();
    }

    // stage 4: per-submap geometry inference
    const std::size_t n_submaps = submaps.size();
    std::vector<SubmapGeometry> canonical(n_submaps);
    std::vector<SubmapGeometry> succeeding(n_submaps);
    std::map<int, SubmapGeometry> historical_reinference;
    timed("geometry", [&] {
      for (std::size_t k = 0; k < n_submaps; ++k) {
        GeometryRequest request;
        request.frames = submaps[k].inference_frames();
        request.submap_id = static_cast<int>(k);
        request.role = ContextRole::Preceding;
        canonical[k] = inputs.provider().infer(request);
        if (k > 0) {
          request.role = ContextRole::Succeeding;
          succeeding[k] = inputs.provider().infer(request);
        }
      }
      if (config.loop_mode == LoopMode::Bidirectional) {
        for (const Submap& sm : submaps) {
          if (sm.loop_frames.empty()) continue;
          GeometryRequest request;
          request.frames =
              submaps[sm.loop_source_submap].inference_frames();
          request.frames.insert(request.frames.end(),
                                sm.bidirectional_exports.begin(),
                                sm.bidirectional_exports.end());
          request.submap_id = sm.loop_source_submap;  // gauge stays historical
          request.role = ContextRole::LoopHistorical;
          request.contamination = config.bi_contamination;
          historical_reinference[sm.id] = inputs.provider().infer(request);
        }
      }
    });

    // stage 5: anchor-driven registration (worker pool over edges)
    std::vector<EdgeJob> jobs;
    std::vector<Sim3Edge> edges;
    timed("registration", [&] {
      for (std::size_t k = 0; k + 1 < n_submaps; ++k) {
        EdgeJob job;
        job.from = static_cast<int>(k);
        job.to = static_cast<int>(k + 1);
        job.kind = EdgeKind::Odometry;
        job.anchor = select_overlap_anchor(submaps[k].overlap_frames,
                                           config.registration.anchor_window);
        job.src = &canonical[k];
        job.dst = &succeeding[k + 1];
        jobs.push_back(std::move(job));
      }
      for (const Submap& sm : submaps) {
        if (sm.loop_frames.empty()) continue;
        EdgeJob job;
        job.from = sm.loop_source_submap;
        job.to = sm.id;
        job.kind = EdgeKind::Loop;
        job.anchor.kind = AnchorKind::Loop;
        job.anchor.frames = sm.loop_frames;
        job.src = config.loop_mode == LoopMode::Bidirectional
                      ? &historical_reinference.at(sm.id)
                      : &canonical[sm.loop_source_submap];
        job.dst = &canonical[sm.id];
        jobs.push_back(std::move(job));
      }

      edges.resize(jobs.size());
      RobustEstimateParams reg_params;
      reg_params.max_iters = config.registration.max_iters;
      reg_params.delta_mode = config.registration.huber_mode;
      reg_params.fixed_delta = config.registration.huber_fixed_delta;
      parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
        const EdgeJob& job = jobs[i];
        EdgeEstimationInput input;
        input.geometry_src = job.src;
        input.geometry_dst = job.dst;
        input.anchor = job.anchor;
        input.tau_conf = config.registration.tau_conf;
        const RegistrationResult result = estimate_edge(input, reg_params);

        Sim3Edge edge;
        edge.from_submap = job.from;
        edge.to_submap = job.to;
        // the estimate maps src-local onto dst-local; the graph stores the
        // relative pose of `to` in `from`, which is its inverse
        edge.transform = sim3_inverse(result.transform);
        edge.inlier_ratio = result.inlier_ratio;
        edge.kind = job.kind;
        edges[i] = verify_constraint(edge, config.registration.tau_in);
      });
      report.edges_total = edges.size();
      for (const Sim3Edge& e : edges) {
        if (e.accepted) {
          ++report.edges_accepted;
        } else {
          ++report.edges_rejected;
        }
      }
    });

    // stage 6: pose graph optimization
    PoseGraph graph;
    timed("optimization", [&] {
      graph = build_pose_graph(static_cast<int>(n_submaps), edges, 0);
      report.optimize = optimize_graph(graph, config.lm);
    });

    // stage 7: trajectory composition
    Trajectory trajectory;
    timed("composition", [&] {
      trajectory = compose_global_trajectory(graph, submaps, canonical,
                                             inputs.frame_dt);
    });

    // artifacts so far (outside the timed regions)
    current_stage = "artifacts";
    const std::string traj_path =
        (out_dir / (config.output_format == TrajectoryFormat::TUM
                        ? "trajectory.tum"
                        : "trajectory.kitti"))
            .string();
    save_trajectory(traj_path, trajectory, config.output_format);
    artifacts.note(traj_path);

    const std::string partition_path = (out_dir / "partition_report.csv").string();
    write_text(partition_path, partition_report_csv(submaps));
    artifacts.note(partition_path);

    const std::string edges_path = (out_dir / "edges.csv").string();
    write_text(edges_path, edge_dump_csv(edges));
    artifacts.note(edges_path);

    const std::string nodes_path = (out_dir / "graph_nodes.csv").string();
    write_text(nodes_path, graph_dump_csv(graph));
    artifacts.note(nodes_path);

    const std::string opt_path = (out_dir / "graph_report.txt").string();
    write_text(opt_path, optimize_report_text(report.optimize));
    artifacts.note(opt_path);

    std::string reference_path = inputs.reference_path;
    if (inputs.world) {
      // the ground truth is itself an artifact; evaluation reloads it from
      // disk so synthetic and replay runs share one code path
      Trajectory gt;
      gt.poses.reserve(inputs.world->frame_count());
      for (std::size_t f = 0; f < inputs.world->frame_count(); ++f) {
        gt.poses.push_back(
            {inputs.world->timestamp(f), inputs.world->gt_trajectory[f]});
      }
      reference_path = (out_dir / "gt_trajectory.tum").string();
      save_trajectory(reference_path, gt, TrajectoryFormat::TUM);
      artifacts.note(reference_path);
    }

    if (config.record_geometry && inputs.world) {
      write_flow_stats(replay_bundle + "/flow_stats.csv", inputs.stats);
      write_loop_candidates(replay_bundle + "/loop_candidates.csv", loop_hits);
      fs::copy_file(reference_path, replay_bundle + "/gt_trajectory.tum",
                    fs::copy_options::overwrite_existing);

      KeyValueConfig replay_config;
      replay_config.set("pipeline.mode", "replay");
      replay_config.set("pipeline.loop_mode",
                        config.loop_mode == LoopMode::Unidirectional ? "uni"
                        : config.loop_mode == LoopMode::Bidirectional ? "bi"
                                                                      : "off");
      replay_config.set("pipeline.seed", std::to_string(config.seed));
      replay_config.set("replay.dir", fs::absolute(replay_bundle).string());
      replay_config.set("replay.reference",
                        fs::absolute(replay_bundle + "/gt_trajectory.tum").string());
      char dt_buf[40];
      std::snprintf(dt_buf, sizeof(dt_buf), "%.17g", inputs.frame_dt);
      replay_config.set("replay.frame_dt", dt_buf);
      std::string cfg_text = "# replay bundle written by the generate command\n";
      for (const auto& key :
           {"pipeline.mode", "pipeline.loop_mode", "pipeline.seed",
            "replay.dir", "replay.reference", "replay.frame_dt"}) {
        cfg_text += std::string(key) + " = " + replay_config.get_string(key, "") + "\n";
      }
      write_text(replay_bundle + "/replay_config.cfg", cfg_text);
      artifacts.note(replay_bundle + "/replay_config.cfg");
    }

    // stage 8: evaluation against the reference, when one exists
    if (!reference_path.empty()) {
      Trajectory reference;
      Trajectory estimate;
      timed("evaluation", [&] {
        reference = load_trajectory(reference_path, TrajectoryFormat::TUM);
        estimate = load_trajectory(traj_path, config.output_format);
        report.metrics = evaluate_trajectory(estimate, reference);
      });
      const std::string metrics_path = (out_dir / "metric_report.txt").string();
      write_text(metrics_path, format_metric_report(*report.metrics));
      artifacts.note(metrics_path);
    }

    current_stage = "report";
    report.artifacts = artifacts.written;
    const std::string report_path = (out_dir / "pipeline_report.txt").string();
    write_text(report_path, format_pipeline_report(report));
    report.artifacts.push_back(report_path);
    return report;
  } catch (const std::exception& e) {
    artifacts.mark_partial();
    throw std::runtime_error("pipeline stage '" + current_stage +
                             "' failed: " + e.what());
  }
}

}  // namespace mslam
