#include "mslam/pointmap_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mslam/errors.hpp"

namespace mslam {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'A', 'P'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ParseError("read_pointmap: truncated file " + path);
  return value;
}

}  // namespace

void write_pointmap(const std::string& path, const SubmapGeometry& geometry) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("write_pointmap: cannot open " + path);

  out.write(kMagic, 4);
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint32_t>(geometry.height));
  write_raw(out, static_cast<std::uint32_t>(geometry.width));
  write_raw(out, static_cast<std::uint32_t>(geometry.frames.size()));

  const std::size_t px =
      static_cast<std::size_t>(geometry.height) * geometry.width;
  for (const FrameGeometry& frame : geometry.frames) {
    if (frame.points.size() != px || frame.confidence.size() != px ||
        frame.sky.size() != px) {
      throw InvalidArgumentError("write_pointmap: inconsistent grid sizes");
    }
    out.write(reinterpret_cast<const char*>(frame.points.data()),
              static_cast<std::streamsize>(px * 3 * sizeof(float)));
    out.write(reinterpret_cast<const char*>(frame.confidence.data()),
              static_cast<std::streamsize>(px * sizeof(float)));
    out.write(reinterpret_cast<const char*>(frame.sky.data()),
              static_cast<std::streamsize>(px));
  }
  if (!out) throw ParseError("write_pointmap: write failed for " + path);
}

SubmapGeometry read_pointmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("read_pointmap: cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("read_pointmap: bad magic in " + path);
  }
  const auto version = read_raw<std::uint16_t>(in, path);
  if (version != kVersion) {
    throw ParseError("read_pointmap: unsupported version in " + path);
  }
  SubmapGeometry geometry;
  geometry.height = static_cast<int>(read_raw<std::uint32_t>(in, path));
  geometry.width = static_cast<int>(read_raw<std::uint32_t>(in, path));
  const auto frame_count = read_raw<std::uint32_t>(in, path);

  const std::size_t px =
      static_cast<std::size_t>(geometry.height) * geometry.width;
  geometry.frames.resize(frame_count);
  for (FrameGeometry& frame : geometry.frames) {
    frame.points.resize(px);
    frame.confidence.resize(px);
    frame.sky.resize(px);
    in.read(reinterpret_cast<char*>(frame.points.data()),
            static_cast<std::streamsize>(px * 3 * sizeof(float)));
    in.read(reinterpret_cast<char*>(frame.confidence.data()),
            static_cast<std::streamsize>(px * sizeof(float)));
    in.read(reinterpret_cast<char*>(frame.sky.data()),
            static_cast<std::streamsize>(px));
    if (!in) throw ParseError("read_pointmap: truncated file " + path);
  }
  return geometry;
}

namespace {

// rotations travel as full 9-entry matrices at %.17g so the text
// round-trip is bitwise lossless
void print_pose(std::ofstream& out, const char* tag, int id,
                const Rotation3& rotation, const Eigen::Vector3d& t,
                double scale) {
  const Eigen::Matrix3d& r = rotation.matrix();
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%s %d %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g "
                "%.17g %.17g %.17g %.17g\n",
                tag, id, scale, r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1),
                r(1, 2), r(2, 0), r(2, 1), r(2, 2), t.x(), t.y(), t.z());
  out << buf;
}

struct ParsedPose {
  int id = 0;
  double scale = 1.0;
  Rotation3 rotation;
  Eigen::Vector3d translation;
};

ParsedPose scan_pose(std::ifstream& in) {
  ParsedPose p;
  Eigen::Matrix3d r;
  in >> p.id >> p.scale >> r(0, 0) >> r(0, 1) >> r(0, 2) >> r(1, 0) >>
      r(1, 1) >> r(1, 2) >> r(2, 0) >> r(2, 1) >> r(2, 2) >>
      p.translation.x() >> p.translation.y() >> p.translation.z();
  p.rotation = Rotation3::from_orthonormal(r);
  return p;
}

}  // namespace

void write_pointmap_sidecar(const std::string& path,
                            const SubmapGeometry& geometry) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_pointmap_sidecar: cannot open " + path);
  out << "submap " << geometry.submap_id << "\n";
  print_pose(out, "gauge", 0, geometry.applied_gauge.rotation,
             geometry.applied_gauge.translation, geometry.applied_gauge.scale);
  for (const FrameGeometry& frame : geometry.frames) {
    print_pose(out, "frame", frame.frame_id, frame.local_pose.rotation,
               frame.local_pose.translation, 1.0);
  }
}

void read_pointmap_sidecar(const std::string& path, SubmapGeometry& geometry) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_pointmap_sidecar: cannot open " + path);
  std::string tag;
  std::size_t next_frame = 0;
  while (in >> tag) {
    if (tag == "submap") {
      in >> geometry.submap_id;
    } else if (tag == "gauge") {
      const ParsedPose p = scan_pose(in);
      geometry.applied_gauge = Sim3{p.scale, p.rotation, p.translation};
    } else if (tag == "frame") {
      if (next_frame >= geometry.frames.size()) {
        throw DataError("read_pointmap_sidecar: more poses than frames in " +
                        path);
      }
      FrameGeometry& frame = geometry.frames[next_frame++];
      const ParsedPose p = scan_pose(in);
      frame.frame_id = p.id;
      frame.local_pose = RigidPose{p.rotation, p.translation};
    } else {
      throw ParseError("read_pointmap_sidecar: unknown tag '" + tag + "' in " +
                       path);
    }
    if (!in && !in.eof()) {
      throw ParseError("read_pointmap_sidecar: malformed record in " + path);
    }
  }
  if (next_frame != geometry.frames.size()) {
    throw DataError("read_pointmap_sidecar: pose count mismatch in " + path);
  }
}

}  // namespace mslam
