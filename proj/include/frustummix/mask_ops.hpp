#pragma once

#include <cstdint>
#include <vector>

#include "frustummix/core.hpp"
#include "frustummix/formats.hpp"

namespace fmx {

// Mask proportion presets.
inline constexpr double kProportionLarge = 4.0 / 5.0;
inline constexpr double kProportionMedium = 3.0 / 5.0;
inline constexpr double kProportionSmall = 1.0 / 3.0;
inline constexpr double kDefaultProportion = kProportionMedium;

struct MergedMask {
  FrameSize frame;
  std::vector<std::uint8_t> data;           // 1 = selected pixel
  std::vector<std::uint32_t> selected_ids;  // sorted ascending
  double proportion = kDefaultProportion;
  std::uint64_t seed = 0;

  bool at(std::size_t pixel) const { return data[pixel] != 0; }
  friend bool operator==(const MergedMask&, const MergedMask&) = default;
};

// max(1, floor(proportion * num_masks + 0.5)).
std::uint32_t sample_count(double proportion, std::uint32_t num_masks);

// Draws sample_count(proportion, K) distinct ids uniformly with a partial
// Fisher-Yates shuffle of [1..K] driven by Xoshiro256ss(seed), then marks
// every pixel whose id is selected.
MergedMask sample_and_merge(const MaskPack& pack, double proportion, std::uint64_t seed);

// Per-pixel negation; selected_ids cleared, proportion and seed kept.
MergedMask remainder(const MergedMask& mask);

// Whole-frame masks, handy for limit cases.
MergedMask full_mask(FrameSize frame, bool value);

}  // namespace fmx
