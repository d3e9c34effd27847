#include "frustummix/core.hpp"

#include <cmath>
#include <sstream>

#include "frustummix/error.hpp"

namespace fmx {

namespace {

void add(Report& r, std::string invariant, std::string detail) {
  r.push_back({std::move(invariant), std::move(detail)});
}

template <typename Fields>
Fields checked(Fields f, Report (*check)(const Fields&), const char* what) {
  Report r = check(f);
  if (!r.empty()) fail(Errc::InvalidValue, std::string(what) + ": " + format_report(r));
  return f;
}

// Guards size products against overflow before a length comparison.
bool product_fits(std::size_t a, std::size_t b, std::size_t c, std::size_t& out) {
  if (a != 0 && b > SIZE_MAX / a) return false;
  std::size_t ab = a * b;
  if (ab != 0 && c > SIZE_MAX / ab) return false;
  out = ab * c;
  return true;
}

}  // namespace

std::string format_report(const Report& report) {
  std::ostringstream os;
  for (std::size_t i = 0; i < report.size(); ++i) {
    if (i) os << "; ";
    os << report[i].invariant << " (" << report[i].detail << ")";
  }
  return os.str();
}

// --- Image ------------------------------------------------------------------

Report validate(const ImageFields& f) {
  Report r;
  if (f.channels < 1 || f.channels > 4) add(r, "channel count", "channels must be in 1..4");
  std::size_t expected = 0;
  if (!product_fits(f.height, f.width, f.channels, expected) || f.data.size() != expected) {
    add(r, "data length", "expected height*width*channels values");
    return r;
  }
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    float x = f.data[i];
    if (!std::isfinite(x) || x < 0.0f || x > 1.0f) {
      add(r, "value range", "value at " + std::to_string(i) + " not finite in [0,1]");
      break;
    }
  }
  return r;
}

Image Image::create(ImageFields fields) { return Image(checked(std::move(fields), &validate, "Image")); }

// --- PointCloud -------------------------------------------------------------

Report validate(const PointCloudFields& f) {
  Report r;
  if (f.xyz.size() != std::size_t{f.count} * 3) {
    add(r, "xyz length", "expected 3*count coordinates");
  } else {
    for (std::size_t i = 0; i < f.xyz.size(); ++i) {
      if (!std::isfinite(f.xyz[i])) {
        add(r, "finite coordinates", "coordinate " + std::to_string(i) + " not finite");
        break;
      }
    }
  }
  if (f.labels && f.labels->size() != f.count) add(r, "labels length", "expected count labels");
  return r;
}

PointCloud PointCloud::create(PointCloudFields fields) {
  return PointCloud(checked(std::move(fields), &validate, "PointCloud"));
}

// --- LabelMap ---------------------------------------------------------------

Report validate(const LabelMapFields& f) {
  Report r;
  if (f.data.size() != std::size_t{f.height} * f.width) {
    add(r, "data length", "expected height*width labels");
    return r;
  }
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    if (f.data[i] != kIgnoreId && f.data[i] >= f.num_classes) {
      add(r, "class bound", "label " + std::to_string(f.data[i]) + " at " + std::to_string(i) +
                                " >= num_classes " + std::to_string(f.num_classes));
      break;
    }
  }
  return r;
}

LabelMap LabelMap::create(LabelMapFields fields) {
  return LabelMap(checked(std::move(fields), &validate, "LabelMap"));
}

// --- ProbabilityMap / LogitMap ---------------------------------------------

namespace {

Report validate_class_map_shape(const ClassMapFields& f) {
  Report r;
  if (f.num_classes == 0) add(r, "class count", "num_classes must be >= 1");
  std::size_t expected = 0;
  if (!product_fits(f.height, f.width, f.num_classes, expected) || f.data.size() != expected)
    add(r, "data length", "expected height*width*num_classes values");
  return r;
}

}  // namespace

Report validate_probabilities(const ClassMapFields& f) {
  Report r = validate_class_map_shape(f);
  if (!r.empty()) return r;
  const std::size_t c = f.num_classes;
  for (std::size_t p = 0; p < f.positions(); ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      float x = f.data[p * c + k];
      if (!std::isfinite(x) || x < 0.0f) {
        add(r, "nonnegative values", "position " + std::to_string(p) + " has a negative or non-finite value");
        return r;
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      add(r, "per-pixel sum", "position " + std::to_string(p) + " sums to " + std::to_string(sum));
      return r;
    }
  }
  return r;
}

Report validate_logits(const ClassMapFields& f) {
  Report r = validate_class_map_shape(f);
  if (!r.empty()) return r;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    if (!std::isfinite(f.data[i])) {
      add(r, "finite values", "logit " + std::to_string(i) + " not finite");
      break;
    }
  }
  return r;
}

template <bool IsProbability>
ClassMap<IsProbability> ClassMap<IsProbability>::create(ClassMapFields fields) {
  if constexpr (IsProbability) {
    return ClassMap(checked(std::move(fields), &validate_probabilities, "ProbabilityMap"));
  } else {
    return ClassMap(checked(std::move(fields), &validate_logits, "LogitMap"));
  }
}

template class ClassMap<true>;
template class ClassMap<false>;

// --- CameraModel ------------------------------------------------------------

Report validate(const CameraFields& f) {
  Report r;
  for (float x : {f.fx, f.fy, f.cx, f.cy}) {
    if (!std::isfinite(x)) {
      add(r, "finite intrinsics", "intrinsic parameter not finite");
      return r;
    }
  }
  for (float x : f.extrinsic) {
    if (!std::isfinite(x)) {
      add(r, "finite extrinsic", "extrinsic entry not finite");
      return r;
    }
  }
  if (!(f.fx > 0.0f) || !(f.fy > 0.0f)) add(r, "positive focal length", "fx and fy must be > 0");
  // R * R^T == I for the upper-left 3x3 block.
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += double{f.extrinsic[i * 4 + k]} * f.extrinsic[j * 4 + k];
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  if (worst > kRotationTolerance)
    add(r, "orthonormal rotation", "max |R R^T - I| = " + std::to_string(worst));
  return r;
}

CameraModel CameraModel::create(CameraFields fields) {
  return CameraModel(checked(std::move(fields), &validate, "CameraModel"));
}

// --- PointImage -------------------------------------------------------------

Report validate(const PointImageFields& f) {
  Report r;
  const std::size_t n = f.count;
  if (f.u.size() != n || f.v.size() != n || f.depth.size() != n || f.valid.size() != n) {
    add(r, "array length", "u, v, depth and valid must each hold count entries");
    return r;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (f.valid[i] > 1) {
      add(r, "valid flag", "flag at " + std::to_string(i) + " is not 0/1");
      return r;
    }
    if (!f.valid[i]) continue;
    if (f.u[i] >= f.frame.width || f.v[i] >= f.frame.height) {
      add(r, "frame bound", "valid point " + std::to_string(i) + " outside the frame");
      return r;
    }
    if (!std::isfinite(f.depth[i]) || !(f.depth[i] > 0.0f)) {
      add(r, "positive depth", "valid point " + std::to_string(i) + " has depth <= 0");
      return r;
    }
  }
  return r;
}

PointImage PointImage::create(PointImageFields fields) {
  return PointImage(checked(std::move(fields), &validate, "PointImage"));
}

std::optional<Pixel> PointImage::pixel(std::size_t i) const {
  if (!is_valid(i)) return std::nullopt;
  return Pixel{f_.u[i], f_.v[i]};
}

std::optional<float> PointImage::depth(std::size_t i) const {
  if (!is_valid(i)) return std::nullopt;
  return f_.depth[i];
}

// --- MixedSample ------------------------------------------------------------

Report validate(const MixedSampleFields& f) {
  Report r;
  const FrameSize frame = f.image.frame();
  if (f.labels_2d.frame() != frame) add(r, "label frame", "labels_2d dims differ from image dims");
  if (f.indices.frame() != frame) add(r, "index frame", "indices frame differs from image dims");
  if (f.indices.count() != f.points.count()) add(r, "index count", "one index per mixed point required");
  if (!f.points.has_labels()) add(r, "point labels", "mixed cloud must carry per-point labels");
  if (f.pixel_provenance.size() != frame.pixels()) add(r, "pixel provenance", "one tag per pixel required");
  if (f.point_provenance.size() != f.points.count()) add(r, "point provenance", "one tag per point required");
  for (Domain d : f.pixel_provenance) {
    if (d != Domain::Source && d != Domain::Target) {
      add(r, "provenance tag", "pixel tag outside {SOURCE, TARGET}");
      break;
    }
  }
  for (Domain d : f.point_provenance) {
    if (d != Domain::Source && d != Domain::Target) {
      add(r, "provenance tag", "point tag outside {SOURCE, TARGET}");
      break;
    }
  }
  return r;
}

MixedSample MixedSample::create(MixedSampleFields fields) {
  return MixedSample(checked(std::move(fields), &validate, "MixedSample"));
}

}  // namespace fmx
