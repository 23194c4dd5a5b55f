#pragma once

#include <string>

#include "mslam/geometry_provider.hpp"

namespace mslam {

/// Point-map container: magic `PMAP`, u16 version, little-endian u32
/// H, W, F, then F frames of (H*W*3 float32 points, H*W float32
/// confidences, H*W u8 sky flags), row-major. Grids only; frame ids,
/// poses and the gauge travel in a text sidecar next to the container.
void write_pointmap(const std::string& path, const SubmapGeometry& geometry);
SubmapGeometry read_pointmap(const std::string& path);

/// Sidecar: `gauge s qx qy qz qw tx ty tz` then one
/// `frame <id> tx ty tz qx qy qz qw` line per frame, full precision.
void write_pointmap_sidecar(const std::string& path,
                            const SubmapGeometry& geometry);
void read_pointmap_sidecar(const std::string& path, SubmapGeometry& geometry);

}  // namespace mslam
