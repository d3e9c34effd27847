#include "frustummix/projection.hpp"

#include <cmath>

#include "frustummix/error.hpp"

namespace fmx {

std::array<double, 3> to_camera_frame(const CameraModel& camera, const std::array<float, 3>& p) {
  const auto& e = camera.extrinsic();
  return {
      double{e[0]} * p[0] + double{e[1]} * p[1] + double{e[2]} * p[2] + e[3],
      double{e[4]} * p[0] + double{e[5]} * p[1] + double{e[6]} * p[2] + e[7],
      double{e[8]} * p[0] + double{e[9]} * p[1] + double{e[10]} * p[2] + e[11],
  };
}

std::array<double, 3> unproject_to_camera(const CameraModel& camera, Pixel pixel, double depth) {
  return {(pixel.u - double{camera.cx()}) * depth / camera.fx(), (pixel.v - double{camera.cy()}) * depth / camera.fy(),
          depth};
}

PointImage project(const PointCloud& points, const CameraModel& camera, FrameSize frame) {
  if (frame.height == 0 || frame.width == 0) fail(Errc::InvalidValue, "frame dims must be >= 1");
  const double fx = camera.fx(), fy = camera.fy(), cx = camera.cx(), cy = camera.cy();

  PointImageFields out;
  out.count = points.count();
  out.frame = frame;
  out.u.assign(out.count, 0);
  out.v.assign(out.count, 0);
  out.depth.assign(out.count, 0.0f);
  out.valid.assign(out.count, 0);

  for (std::size_t i = 0; i < out.count; ++i) {
    const auto [x, y, z] = to_camera_frame(camera, points.point(i));
    if (!(z > kMinDepth)) continue;
    const double u = std::floor(fx * x / z + cx + 0.5);
    const double v = std::floor(fy * y / z + cy + 0.5);
    if (!(u >= 0.0 && u < frame.width && v >= 0.0 && v < frame.height)) continue;
    out.u[i] = static_cast<std::uint32_t>(u);
    out.v[i] = static_cast<std::uint32_t>(v);
    out.depth[i] = static_cast<float>(z);
    out.valid[i] = 1;
  }
  return PointImage::create(std::move(out));
}

std::array<double, 3> unproject(const CameraModel& camera, Pixel pixel, double depth) {
  const auto& e = camera.extrinsic();
  const auto [xc, yc, zc] = unproject_to_camera(camera, pixel, depth);
  // x = R^T (x_c - t)
  const double dx = xc - e[3], dy = yc - e[7], dz = zc - e[11];
  return {
      double{e[0]} * dx + double{e[4]} * dy + double{e[8]} * dz,
      double{e[1]} * dx + double{e[5]} * dy + double{e[9]} * dz,
      double{e[2]} * dx + double{e[6]} * dy + double{e[10]} * dz,
  };
}

std::vector<std::uint16_t> labels_to_points(const PointImage& point_image, const LabelMap& labels) {
  if (labels.frame() != point_image.frame())
    fail(Errc::DimensionMismatch, "label map dims differ from the point image frame");
  std::vector<std::uint16_t> out(point_image.count(), kIgnoreId);
  const std::size_t width = labels.width();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (auto px = point_image.pixel(i)) out[i] = labels.at(std::size_t{px->v} * width + px->u);
  }
  return out;
}

}  // namespace fmx
