#include "frustummix/frustum_mixing.hpp"

#include <algorithm>

#include "frustummix/error.hpp"
#include "frustummix/projection.hpp"
#include "frustummix/rng.hpp"

namespace fmx {

namespace {

void check_mask(const MergedMask& mask, FrameSize frame, const char* what) {
  if (mask.frame != frame || mask.data.size() != frame.pixels())
    fail(Errc::DimensionMismatch, std::string(what) + ": mask dims differ from sample dims");
}

Domain other(Domain d) { return d == Domain::Source ? Domain::Target : Domain::Source; }

}  // namespace

Report validate(const DomainSample& s) {
  Report r;
  const FrameSize frame = s.image.frame();
  if (s.labels_2d.frame() != frame) r.push_back({"label frame", "labels_2d dims differ from image dims"});
  if (s.point_image.frame() != frame) r.push_back({"point image frame", "point image frame differs from image dims"});
  if (s.point_image.count() != s.points.count())
    r.push_back({"point image count", "point image must index every cloud point"});
  if (s.labels_3d.size() != s.points.count()) r.push_back({"point labels", "one label per point required"});
  return r;
}

DomainSample make_domain_sample(Image image, PointCloud points, LabelMap labels_2d, const CameraModel& camera) {
  if (labels_2d.frame() != image.frame()) fail(Errc::DimensionMismatch, "label map dims differ from image dims");
  PointImage pi = project(points, camera, image.frame());
  std::vector<std::uint16_t> labels_3d;
  if (points.has_labels()) {
    auto l = points.labels();
    labels_3d.assign(l.begin(), l.end());
  } else {
    labels_3d = labels_to_points(pi, labels_2d);
  }
  return DomainSample{std::move(image), std::move(points), std::move(pi), std::move(labels_2d), std::move(labels_3d)};
}

Image mix_images(const MergedMask& mask, const Image& donor, const Image& base) {
  if (donor.frame() != base.frame()) fail(Errc::DimensionMismatch, "mix_images: donor and base dims differ");
  if (donor.channels() != base.channels()) fail(Errc::DimensionMismatch, "mix_images: channel counts differ");
  check_mask(mask, base.frame(), "mix_images");
  ImageFields out = base.fields();
  const std::size_t c = base.channels();
  auto src = donor.data();
  for (std::size_t p = 0; p < mask.data.size(); ++p) {
    if (!mask.data[p]) continue;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(p * c), c, out.data.begin() + static_cast<std::ptrdiff_t>(p * c));
  }
  return Image::create(std::move(out));
}

LabelMap mix_labels(const MergedMask& mask, const LabelMap& donor, const LabelMap& base) {
  if (donor.frame() != base.frame()) fail(Errc::DimensionMismatch, "mix_labels: donor and base dims differ");
  check_mask(mask, base.frame(), "mix_labels");
  LabelMapFields out = base.fields();
  out.num_classes = std::max(donor.num_classes(), base.num_classes());
  auto src = donor.data();
  for (std::size_t p = 0; p < mask.data.size(); ++p)
    if (mask.data[p]) out.data[p] = src[p];
  return LabelMap::create(std::move(out));
}

MixedPoints mix_points(const MergedMask& mask, const PointSide& donor, const PointSide& base, Domain donor_domain) {
  for (const PointSide* side : {&donor, &base}) {
    check_mask(mask, side->point_image.frame(), "mix_points");
    if (side->point_image.count() != side->cloud.count() || side->labels.size() != side->cloud.count())
      fail(Errc::DimensionMismatch, "mix_points: cloud, point image and labels must align");
  }
  const std::size_t width = mask.frame.width;
  auto on_mask = [&](const PointImage& pi, std::size_t i) {
    auto px = pi.pixel(i);
    return px && mask.data[std::size_t{px->v} * width + px->u] != 0;
  };

  PointCloudFields cloud;
  cloud.labels.emplace();
  PointImageFields idx;
  idx.frame = mask.frame;
  std::vector<Domain> prov;

  auto take = [&](const PointSide& side, std::size_t i, Domain d) {
    const auto p = side.cloud.point(i);
    cloud.xyz.insert(cloud.xyz.end(), p.begin(), p.end());
    cloud.labels->push_back(side.labels[i]);
    const auto& f = side.point_image.fields();
    idx.u.push_back(f.u[i]);
    idx.v.push_back(f.v[i]);
    idx.depth.push_back(f.depth[i]);
    idx.valid.push_back(f.valid[i]);
    prov.push_back(d);
  };

  const Domain base_domain = other(donor_domain);
  for (std::size_t i = 0; i < base.cloud.count(); ++i)
    if (!on_mask(base.point_image, i)) take(base, i, base_domain);
  for (std::size_t i = 0; i < donor.cloud.count(); ++i)
    if (on_mask(donor.point_image, i)) take(donor, i, donor_domain);

  cloud.count = static_cast<std::uint32_t>(prov.size());
  idx.count = cloud.count;
  return MixedPoints{PointCloud::create(std::move(cloud)), PointImage::create(std::move(idx)), std::move(prov)};
}

MixedSample mix_direction(const MergedMask& mask, const DomainSample& donor, const DomainSample& base,
                          Domain donor_domain) {
  for (const DomainSample* s : {&donor, &base}) {
    Report r = validate(*s);
    if (!r.empty()) fail(Errc::DimensionMismatch, "inconsistent domain sample: " + format_report(r));
  }
  Image image = mix_images(mask, donor.image, base.image);
  LabelMap labels = mix_labels(mask, donor.labels_2d, base.labels_2d);
  MixedPoints pts = mix_points(mask, {donor.points, donor.point_image, donor.labels_3d},
                               {base.points, base.point_image, base.labels_3d}, donor_domain);
  std::vector<Domain> pixel_prov(mask.data.size());
  const Domain base_domain = other(donor_domain);
  for (std::size_t p = 0; p < mask.data.size(); ++p) pixel_prov[p] = mask.data[p] ? donor_domain : base_domain;
  return MixedSample::create(MixedSampleFields{std::move(image), std::move(pts.points), std::move(labels),
                                               std::move(pts.indices), std::move(pixel_prov),
                                               std::move(pts.provenance)});
}

MixedPair frustum_mix(const DomainSample& source, const DomainSample& target, const MaskPack& source_pack,
                      const MaskPack& target_pack, double proportion, std::uint64_t seed) {
  const FrameSize frame = source.image.frame();
  if (target.image.frame() != frame) fail(Errc::DimensionMismatch, "source and target frames differ");
  if (source_pack.frame() != frame) fail(Errc::DimensionMismatch, "source mask pack dims differ from source frame");
  if (target_pack.frame() != frame) fail(Errc::DimensionMismatch, "target mask pack dims differ from target frame");

  MergedMask source_mask = sample_and_merge(source_pack, proportion, derive_seed(seed, 0));
  MergedMask target_mask = sample_and_merge(target_pack, proportion, derive_seed(seed, 1));
  MixedSample s2t = mix_direction(source_mask, source, target, Domain::Source);
  MixedSample t2s = mix_direction(target_mask, target, source, Domain::Target);
  return MixedPair{std::move(s2t), std::move(t2s), std::move(source_mask), std::move(target_mask)};
}

}  // namespace fmx
