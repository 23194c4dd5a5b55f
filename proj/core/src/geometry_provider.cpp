#include "mslam/geometry_provider.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "mslam/errors.hpp"
#include "mslam/pointmap_io.hpp"

namespace mslam {

const char* to_string(ContextRole role) {
  switch (role) {
    case ContextRole::Preceding:
      return "preceding";
    case ContextRole::Succeeding:
      return "succeeding";
    case ContextRole::LoopHistorical:
      return "loop_historical";
  }
  return "unknown";
}

void CorruptionConfig::validate() const {
  if (gauge_scale_sigma < 0 || gauge_rot_max < 0 || gauge_trans_sigma < 0 ||
      point_noise_rel < 0 || context_bias_beta < 0 || confidence_noise < 0) {
    throw InvalidArgumentError("CorruptionConfig: negative parameter");
  }
  if (outlier_fraction < 0 || outlier_fraction >= 0.5) {
    throw InvalidArgumentError(
        "CorruptionConfig: outlier_fraction must lie in [0, 0.5)");
  }
}

const FrameGeometry* SubmapGeometry::find_frame(int frame_id) const {
  for (const FrameGeometry& f : frames) {
    if (f.frame_id == frame_id) return &f;
  }
  return nullptr;
}

SyntheticGeometryProvider::SyntheticGeometryProvider(
    const GroundTruthWorld& world, const CorruptionConfig& corruption,
    std::uint64_t seed)
    : world_(world), corruption_(corruption), seed_(seed) {
  corruption_.validate();
}

Sim3 SyntheticGeometryProvider::gauge_for_submap(int submap_id) const {
  std::mt19937_64 rng(hash_key(seed_, 0x47415547ULL, submap_id));
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Sim3 gauge;
  gauge.scale = std::exp(corruption_.gauge_scale_sigma * n01(rng));
  Eigen::Vector3d axis(n01(rng), n01(rng), n01(rng));
  while (axis.norm() < 1e-9) axis = {n01(rng), n01(rng), n01(rng)};
  axis.normalize();
  const double angle = corruption_.gauge_rot_max * u01(rng);
  gauge.rotation = Rotation3::from_axis_angle(angle * axis);
  gauge.translation = corruption_.gauge_trans_sigma *
                      Eigen::Vector3d(n01(rng), n01(rng), n01(rng));
  return gauge;
}

SubmapGeometry SyntheticGeometryProvider::infer(
    const GeometryRequest& request) {
  if (request.frames.empty()) {
    throw InvalidArgumentError("SyntheticGeometryProvider: empty frame list");
  }
  for (const int f : request.frames) {
    if (f < 0 || static_cast<std::size_t>(f) >= world_.frame_count()) {
      throw InvalidArgumentError(
          "SyntheticGeometryProvider: frame outside the world");
    }
  }

  const WorldConfig& cfg = world_.config;
  const SyntheticPinhole cam(cfg);
  const int w = cfg.image_width;
  const int h = cfg.image_height;
  const std::size_t px = static_cast<std::size_t>(w) * h;

  SubmapGeometry out;
  out.submap_id = request.submap_id;
  out.width = w;
  out.height = h;
  out.applied_gauge = gauge_for_submap(request.submap_id);
  const Sim3& gauge = out.applied_gauge;

  // local frame anchored at the first requested frame
  const RigidPose anchor_inv =
      world_.gt_trajectory[request.frames.front()].inverse();

  const double role_sign =
      request.role == ContextRole::Succeeding ? 1.0 : -1.0;
  const double noise_gain = 1.0 + request.contamination;
  const double depth_mid = 0.5 * (cfg.depth_min_m + cfg.depth_max_m);
  const double conf_scale = std::max(1e-9, 0.01 * depth_mid * gauge.scale);

  out.frames.reserve(request.frames.size());
  for (const int frame_id : request.frames) {
    FrameGeometry fg;
    fg.frame_id = frame_id;
    fg.points.resize(px);
    fg.confidence.resize(px);
    fg.sky.assign(px, 0);

    const RigidPose& pose_w = world_.gt_trajectory[frame_id];
    const RigidPose local_pose = anchor_inv * pose_w;
    fg.local_pose = RigidPose{(gauge.rotation * local_pose.rotation),
                              sim3_apply(gauge, local_pose.translation)};

    const PointGridD& grid = world_.gt_points[frame_id];
    const RigidPose to_cam = pose_w.inverse();

    // pass 1: clean gauged points (bias included); sky rows get their own
    // per-call pseudo-depth so two contexts never agree on them
    std::mt19937_64 sky_rng(hash_key(
        seed_, 0x534b59ULL,
        (static_cast<std::uint64_t>(request.submap_id) << 8) |
            static_cast<std::uint64_t>(request.role),
        frame_id));
    std::uniform_real_distribution<double> sky_depth(20.0 * cfg.depth_max_m,
                                                     60.0 * cfg.depth_max_m);
    std::vector<Eigen::Vector3d> clean(px);
    Eigen::Vector3d bbox_lo = Eigen::Vector3d::Constant(1e30);
    Eigen::Vector3d bbox_hi = Eigen::Vector3d::Constant(-1e30);
    for (int row = 0; row < h; ++row) {
      const bool is_sky = row < cfg.sky_band_rows;
      for (int col = 0; col < w; ++col) {
        const std::size_t i = static_cast<std::size_t>(row) * w + col;
        Eigen::Vector3d cam_point;
        if (is_sky) {
          cam_point = sky_depth(sky_rng) * cam.ray(row, col);
          fg.sky[i] = 1;
        } else {
          cam_point = to_cam * grid.at(row, col);
          const double depth = cam_point.z();
          const double bias =
              1.0 + role_sign * corruption_.context_bias_beta * depth /
                        cfg.depth_max_m;
          cam_point *= bias;
        }
        const Eigen::Vector3d local = local_pose * cam_point;
        clean[i] = sim3_apply(gauge, local);
        if (!is_sky) {
          bbox_lo = bbox_lo.cwiseMin(clean[i]);
          bbox_hi = bbox_hi.cwiseMax(clean[i]);
        }
      }
    }
    const Eigen::Vector3d bbox_pad = 0.1 * (bbox_hi - bbox_lo);
    bbox_lo -= bbox_pad;
    bbox_hi += bbox_pad;

    // pass 2: noise, outliers, confidences
    std::mt19937_64 rng(hash_key(
        seed_, 0x4e4f4953ULL,
        (static_cast<std::uint64_t>(request.submap_id) << 8) |
            static_cast<std::uint64_t>(request.role),
        frame_id));
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int row = 0; row < h; ++row) {
      const bool is_sky = row < cfg.sky_band_rows;
      for (int col = 0; col < w; ++col) {
        const std::size_t i = static_cast<std::size_t>(row) * w + col;
        if (is_sky) {
          fg.points[i] = clean[i].cast<float>();
          fg.confidence[i] = 1.0f;  // only the sky flag may exclude these
          continue;
        }
        const double depth = (to_cam * grid.at(row, col)).z();
        Eigen::Vector3d p = clean[i];
        const double noise_std =
            corruption_.point_noise_rel * depth * gauge.scale * noise_gain;
        p += noise_std * Eigen::Vector3d(n01(rng), n01(rng), n01(rng));
        if (corruption_.outlier_fraction > 0.0 &&
            u01(rng) < corruption_.outlier_fraction) {
          p = Eigen::Vector3d(
              bbox_lo.x() + u01(rng) * (bbox_hi.x() - bbox_lo.x()),
              bbox_lo.y() + u01(rng) * (bbox_hi.y() - bbox_lo.y()),
              bbox_lo.z() + u01(rng) * (bbox_hi.z() - bbox_lo.z()));
        }
        const double err = (p - clean[i]).norm();
        double conf = 1.0 / (1.0 + err / conf_scale);
        if (corruption_.confidence_noise > 0.0) {
          conf += corruption_.confidence_noise * n01(rng);
        }
        // tiny positional dither keeps the confidence quantile well
        // defined when the corruption is zero (all errors tie at zero)
        conf -= 1e-7 * static_cast<double>(i % 97) / 97.0;
        fg.points[i] = p.cast<float>();
        fg.confidence[i] = static_cast<float>(std::max(0.0, conf));
      }
    }
    out.frames.push_back(std::move(fg));
  }
  return out;
}

std::string geometry_request_key(const GeometryRequest& request) {
  std::uint64_t frame_hash = hash_key(0x6672616d6573ULL, request.frames.size());
  for (const int f : request.frames) frame_hash = hash_key(frame_hash, f);
  std::uint64_t contamination_bits;
  static_assert(sizeof(contamination_bits) == sizeof(request.contamination));
  std::memcpy(&contamination_bits, &request.contamination,
              sizeof(contamination_bits));
  frame_hash = hash_key(frame_hash, contamination_bits);

  const char role_char = request.role == ContextRole::Preceding    ? 'p'
                         : request.role == ContextRole::Succeeding ? 's'
                                                                   : 'h';
  char buf[64];
  std::snprintf(buf, sizeof(buf), "s%04d_%c_%016llx", request.submap_id,
                role_char, static_cast<unsigned long long>(frame_hash));
  return buf;
}

ReplayGeometryProvider::ReplayGeometryProvider(const std::string& directory)
    : directory_(directory) {
  const std::string manifest = directory + "/geometry_manifest.txt";
  std::ifstream in(manifest);
  if (!in) {
    throw ParseError("ReplayGeometryProvider: cannot open " + manifest);
  }
  std::string key, stem;
  while (in >> key >> stem) stems_[key] = stem;
}

SubmapGeometry ReplayGeometryProvider::infer(const GeometryRequest& request) {
  const std::string key = geometry_request_key(request);
  const auto it = stems_.find(key);
  if (it == stems_.end()) {
    throw DataError("ReplayGeometryProvider: no recording for request " + key);
  }
  const std::string base = directory_ + "/" + it->second;
  SubmapGeometry geometry = read_pointmap(base + ".pmap");
  read_pointmap_sidecar(base + ".meta", geometry);
  return geometry;
}

RecordingGeometryProvider::RecordingGeometryProvider(GeometryProvider& inner,
                                                     std::string directory)
    : inner_(inner), directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

SubmapGeometry RecordingGeometryProvider::infer(
    const GeometryRequest& request) {
  SubmapGeometry geometry = inner_.infer(request);
  const std::string key = geometry_request_key(request);
  const std::string base = directory_ + "/" + key;
  write_pointmap(base + ".pmap", geometry);
  write_pointmap_sidecar(base + ".meta", geometry);
  manifest_lines_.push_back(key + " " + key);
  return geometry;
}

RecordingGeometryProvider::~RecordingGeometryProvider() {
  std::set<std::string> unique(manifest_lines_.begin(), manifest_lines_.end());
  std::ofstream out(directory_ + "/geometry_manifest.txt");
  for (const std::string& line : unique) out << line << "\n";
}

}  // namespace mslam
