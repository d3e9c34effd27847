#include "frustummix/mask_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "frustummix/error.hpp"
#include "frustummix/rng.hpp"

namespace fmx {

namespace {

void check_proportion(double proportion) {
  if (!(proportion > 0.0 && proportion <= 1.0))
    fail(Errc::OutOfRange, "proportion must lie in (0, 1], got " + std::to_string(proportion));
}

}  // namespace

std::uint32_t sample_count(double proportion, std::uint32_t num_masks) {
  check_proportion(proportion);
  const double scaled = std::floor(proportion * static_cast<double>(num_masks) + 0.5);
  const auto n = static_cast<std::uint32_t>(std::min(scaled, static_cast<double>(num_masks)));
  return std::max<std::uint32_t>(1, n);
}

MergedMask sample_and_merge(const MaskPack& pack, double proportion, std::uint64_t seed) {
  check_proportion(proportion);
  const std::uint32_t k = pack.num_masks();
  if (k == 0) fail(Errc::EmptyInput, "mask pack holds no masks");
  const std::uint32_t n = sample_count(proportion, k);

  std::vector<std::uint32_t> ids(k);
  std::iota(ids.begin(), ids.end(), 1u);
  Xoshiro256ss rng(seed);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.below(k - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(n);
  std::sort(ids.begin(), ids.end());

  std::vector<std::uint8_t> chosen(std::size_t{k} + 1, 0);
  for (std::uint32_t id : ids) chosen[id] = 1;

  MergedMask out;
  out.frame = pack.frame();
  out.proportion = proportion;
  out.seed = seed;
  out.selected_ids = std::move(ids);
  auto matrix = pack.id_matrix();
  out.data.resize(matrix.size());
  for (std::size_t p = 0; p < matrix.size(); ++p) out.data[p] = chosen[matrix[p]];
  return out;
}

MergedMask remainder(const MergedMask& mask) {
  MergedMask out;
  out.frame = mask.frame;
  out.proportion = mask.proportion;
  out.seed = mask.seed;
  out.data.resize(mask.data.size());
  for (std::size_t p = 0; p < mask.data.size(); ++p) out.data[p] = mask.data[p] ? 0 : 1;
  return out;
}

MergedMask full_mask(FrameSize frame, bool value) {
  MergedMask out;
  out.frame = frame;
  out.proportion = 1.0;
  out.data.assign(frame.pixels(), value ? 1 : 0);
  return out;
}

}  // namespace fmx
