#pragma once

// Domain types shared by every module.
//
// Each type comes in two layers: a plain `*Fields` aggregate holding the raw
// data, and an immutable wrapper that can only be obtained through create(),
// which runs the matching validate() overload and throws Errc::InvalidValue if
// the report is non-empty. validate() never throws and never mutates.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fmx {

inline constexpr std::uint16_t kIgnoreId = 0xFFFF;
inline constexpr double kProbSumTolerance = 1e-4;
inline constexpr double kRotationTolerance = 1e-5;

struct Violation {
  std::string invariant;  // short stable tag, e.g. "per-pixel sum"
  std::string detail;
};
using Report = std::vector<Violation>;

std::string format_report(const Report& report);

struct FrameSize {
  std::uint32_t height = 0;
  std::uint32_t width = 0;

  std::size_t pixels() const { return std::size_t{height} * width; }
  friend bool operator==(const FrameSize&, const FrameSize&) = default;
};

enum class Domain : std::uint8_t { Source = 0, Target = 1 };

// ---------------------------------------------------------------------------
// Image

struct ImageFields {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint8_t channels = 0;
  std::vector<float> data;  // row-major HWC, values in [0,1]

  friend bool operator==(const ImageFields&, const ImageFields&) = default;
};

Report validate(const ImageFields& f);

class Image {
 public:
  static Image create(ImageFields fields);

  std::uint32_t height() const { return f_.height; }
  std::uint32_t width() const { return f_.width; }
  std::uint8_t channels() const { return f_.channels; }
  FrameSize frame() const { return {f_.height, f_.width}; }
  std::span<const float> data() const { return f_.data; }
  std::span<const float> pixel(std::size_t index) const {
    return std::span<const float>(f_.data).subspan(index * f_.channels, f_.channels);
  }
  const ImageFields& fields() const { return f_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  explicit Image(ImageFields f) : f_(std::move(f)) {}
  ImageFields f_;
};

// ---------------------------------------------------------------------------
// PointCloud

struct PointCloudFields {
  std::uint32_t count = 0;
  std::vector<float> xyz;  // 3 * count
  std::optional<std::vector<std::uint16_t>> labels;

  friend bool operator==(const PointCloudFields&, const PointCloudFields&) = default;
};

Report validate(const PointCloudFields& f);

class PointCloud {
 public:
  static PointCloud create(PointCloudFields fields);

  std::uint32_t count() const { return f_.count; }
  std::span<const float> xyz() const { return f_.xyz; }
  std::array<float, 3> point(std::size_t i) const {
    return {f_.xyz[3 * i], f_.xyz[3 * i + 1], f_.xyz[3 * i + 2]};
  }
  bool has_labels() const { return f_.labels.has_value(); }
  std::span<const std::uint16_t> labels() const {
    return f_.labels ? std::span<const std::uint16_t>(*f_.labels) : std::span<const std::uint16_t>{};
  }
  const PointCloudFields& fields() const { return f_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  explicit PointCloud(PointCloudFields f) : f_(std::move(f)) {}
  PointCloudFields f_;
};

// ---------------------------------------------------------------------------
// LabelMap. The ignore id is fixed at kIgnoreId; num_classes bounds every
// other id.

struct LabelMapFields {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint16_t num_classes = 0;
  std::vector<std::uint16_t> data;

  friend bool operator==(const LabelMapFields&, const LabelMapFields&) = default;
};

Report validate(const LabelMapFields& f);

class LabelMap {
 public:
  static LabelMap create(LabelMapFields fields);

  std::uint32_t height() const { return f_.height; }
  std::uint32_t width() const { return f_.width; }
  FrameSize frame() const { return {f_.height, f_.width}; }
  std::uint16_t num_classes() const { return f_.num_classes; }
  static constexpr std::uint16_t ignore_id() { return kIgnoreId; }
  std::span<const std::uint16_t> data() const { return f_.data; }
  std::uint16_t at(std::size_t index) const { return f_.data[index]; }
  const LabelMapFields& fields() const { return f_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  explicit LabelMap(LabelMapFields f) : f_(std::move(f)) {}
  LabelMapFields f_;
};

// ---------------------------------------------------------------------------
// ProbabilityMap / LogitMap share a layout: row-major HWC float32 with
// num_classes values per position. Per-point arrays use height 1, width N.

struct ClassMapFields {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint16_t num_classes = 0;
  std::vector<float> data;

  std::size_t positions() const { return std::size_t{height} * width; }
  friend bool operator==(const ClassMapFields&, const ClassMapFields&) = default;
};

Report validate_probabilities(const ClassMapFields& f);
Report validate_logits(const ClassMapFields& f);

template <bool IsProbability>
class ClassMap {
 public:
  static ClassMap create(ClassMapFields fields);

  std::uint32_t height() const { return f_.height; }
  std::uint32_t width() const { return f_.width; }
  FrameSize frame() const { return {f_.height, f_.width}; }
  std::uint16_t num_classes() const { return f_.num_classes; }
  std::size_t positions() const { return f_.positions(); }
  std::span<const float> data() const { return f_.data; }
  std::span<const float> row(std::size_t position) const {
    return std::span<const float>(f_.data).subspan(position * f_.num_classes, f_.num_classes);
  }
  const ClassMapFields& fields() const { return f_; }

  friend bool operator==(const ClassMap&, const ClassMap&) = default;

 private:
  explicit ClassMap(ClassMapFields f) : f_(std::move(f)) {}
  ClassMapFields f_;
};

using ProbabilityMap = ClassMap<true>;
using LogitMap = ClassMap<false>;

extern template class ClassMap<true>;
extern template class ClassMap<false>;

// ---------------------------------------------------------------------------
// CameraModel: pinhole intrinsics plus a 3x4 row-major world->camera transform.

struct CameraFields {
  float fx = 0, fy = 0, cx = 0, cy = 0;
  std::array<float, 12> extrinsic{};

  friend bool operator==(const CameraFields&, const CameraFields&) = default;
};

Report validate(const CameraFields& f);

class CameraModel {
 public:
  static CameraModel create(CameraFields fields);

  float fx() const { return f_.fx; }
  float fy() const { return f_.fy; }
  float cx() const { return f_.cx; }
  float cy() const { return f_.cy; }
  const std::array<float, 12>& extrinsic() const { return f_.extrinsic; }
  const CameraFields& fields() const { return f_; }

  friend bool operator==(const CameraModel&, const CameraModel&) = default;

 private:
  explicit CameraModel(CameraFields f) : f_(f) {}
  CameraFields f_;
};

// ---------------------------------------------------------------------------
// PointImage: per-point pixel coordinates in a frame of known size.
// uv and depth of invalid points are stored as zero and are not readable
// through pixel()/depth().

struct Pixel {
  std::uint32_t u = 0;  // column
  std::uint32_t v = 0;  // row
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct PointImageFields {
  std::uint32_t count = 0;
  FrameSize frame;
  std::vector<std::uint32_t> u;
  std::vector<std::uint32_t> v;
  std::vector<float> depth;
  std::vector<std::uint8_t> valid;

  friend bool operator==(const PointImageFields&, const PointImageFields&) = default;
};

Report validate(const PointImageFields& f);

class PointImage {
 public:
  static PointImage create(PointImageFields fields);

  std::uint32_t count() const { return f_.count; }
  FrameSize frame() const { return f_.frame; }
  bool is_valid(std::size_t i) const { return f_.valid[i] != 0; }
  std::optional<Pixel> pixel(std::size_t i) const;
  std::optional<float> depth(std::size_t i) const;
  const PointImageFields& fields() const { return f_; }

  friend bool operator==(const PointImage&, const PointImage&) = default;

 private:
  explicit PointImage(PointImageFields f) : f_(std::move(f)) {}
  PointImageFields f_;
};

// ---------------------------------------------------------------------------
// MixedSample: one direction of a frustum mix. The mixed cloud carries its
// per-point labels in points().labels(); indices() is the point image of the
// mixed cloud in the shared frame.

struct MixedSampleFields {
  Image image;
  PointCloud points;
  LabelMap labels_2d;
  PointImage indices;
  std::vector<Domain> pixel_provenance;
  std::vector<Domain> point_provenance;

  friend bool operator==(const MixedSampleFields&, const MixedSampleFields&) = default;
};

Report validate(const MixedSampleFields& f);

class MixedSample {
 public:
  static MixedSample create(MixedSampleFields fields);

  const Image& image() const { return f_.image; }
  const PointCloud& points() const { return f_.points; }
  const LabelMap& labels_2d() const { return f_.labels_2d; }
  std::span<const std::uint16_t> labels_3d() const { return f_.points.labels(); }
  const PointImage& indices() const { return f_.indices; }
  std::span<const Domain> pixel_provenance() const { return f_.pixel_provenance; }
  std::span<const Domain> point_provenance() const { return f_.point_provenance; }
  const MixedSampleFields& fields() const { return f_; }

  friend bool operator==(const MixedSample&, const MixedSample&) = default;

 private:
  explicit MixedSample(MixedSampleFields f) : f_(std::move(f)) {}
  MixedSampleFields f_;
};

}  // namespace fmx
