#pragma once

// Bidirectional mask-guided mixing of paired image / point-cloud samples.
//
// For one direction, a merged mask sampled from the donor's own mask pack
// selects donor pixels; everything else comes from the base sample:
//
//   image[p]  = mask[p] ? donor.image[p]  : base.image[p]
//   labels[p] = mask[p] ? donor.labels[p] : base.labels[p]
//   points    = base points that are out of frame or off-mask (original order)
//             + donor points that are in frame and on-mask (original order)
//
// Out-of-frame points never leave their own sample.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "frustummix/core.hpp"
#include "frustummix/formats.hpp"
#include "frustummix/mask_ops.hpp"

namespace fmx {

// One side of a mixing call: a paired image and cloud, the point image of the
// cloud in the image frame, and 2D / per-point labels (ground truth for the
// source domain, pseudo-labels for the target domain).
struct DomainSample {
  Image image;
  PointCloud points;  // labels, if any, are ignored; labels_3d is used
  PointImage point_image;
  LabelMap labels_2d;
  std::vector<std::uint16_t> labels_3d;
};

// Checks that every part of a DomainSample shares the image frame and the
// cloud's point count.
Report validate(const DomainSample& s);

// Builds a DomainSample by projecting the cloud with `camera`. Per-point
// labels come from the cloud when it carries them, otherwise from the 2D
// label map at each point's pixel.
DomainSample make_domain_sample(Image image, PointCloud points, LabelMap labels_2d, const CameraModel& camera);

Image mix_images(const MergedMask& mask, const Image& donor, const Image& base);
LabelMap mix_labels(const MergedMask& mask, const LabelMap& donor, const LabelMap& base);

struct PointSide {
  const PointCloud& cloud;
  const PointImage& point_image;
  std::span<const std::uint16_t> labels;
};

struct MixedPoints {
  PointCloud points;  // carries mixed per-point labels
  PointImage indices;
  std::vector<Domain> provenance;
};

MixedPoints mix_points(const MergedMask& mask, const PointSide& donor, const PointSide& base, Domain donor_domain);

// One full direction: donor's mask applied to donor over base.
MixedSample mix_direction(const MergedMask& mask, const DomainSample& donor, const DomainSample& base,
                          Domain donor_domain);

struct MixedPair {
  MixedSample source_to_target;  // source donor, target base
  MixedSample target_to_source;  // target donor, source base
  MergedMask source_mask;
  MergedMask target_mask;
};

// Both mixing directions. The source mask is sampled from source_pack with
// derive_seed(seed, 0) and the target mask from target_pack with
// derive_seed(seed, 1).
MixedPair frustum_mix(const DomainSample& source, const DomainSample& target, const MaskPack& source_pack,
                      const MaskPack& target_pack, double proportion, std::uint64_t seed);

}  // namespace fmx
