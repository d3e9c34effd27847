#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "frustummix/core.hpp"

namespace fmx {

// Points at or closer than this camera-frame depth are culled.
inline constexpr double kMinDepth = 1e-3;

// Pinhole projection: x_c = R*x + t, u = fx*x_c/z_c + cx, v = fy*y_c/z_c + cy,
// both rounded half-up. A point is valid iff z_c > kMinDepth and (u, v) falls
// inside the frame. Invalid points stay in the output (uv/depth zeroed) so
// indices remain aligned with the cloud. No occlusion handling: several
// points may share a pixel, including points hidden behind foreground.
PointImage project(const PointCloud& points, const CameraModel& camera, FrameSize frame);

// World point -> camera frame (double precision).
std::array<double, 3> to_camera_frame(const CameraModel& camera, const std::array<float, 3>& xyz);

// Pixel center and depth -> camera frame.
std::array<double, 3> unproject_to_camera(const CameraModel& camera, Pixel pixel, double depth);

// Inverse of project for a valid pixel/depth pair (pixel centers), in world coordinates.
std::array<double, 3> unproject(const CameraModel& camera, Pixel pixel, double depth);

// Per-point labels looked up at each valid point's pixel; invalid points get
// kIgnoreId.
std::vector<std::uint16_t> labels_to_points(const PointImage& point_image, const LabelMap& labels);

}  // namespace fmx
