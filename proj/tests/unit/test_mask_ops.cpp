#include <gtest/gtest.h>

#include <cmath>

#include "frustummix/error.hpp"
#include "frustummix/mask_ops.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fmx;
using fmx::testing::Gen;

namespace {

MaskPack stripes(std::uint32_t k) {
  // 1 x k frame, pixel i owned by mask i+1
  MaskPackFields f{1, k, k, {}, {}, std::nullopt};
  for (std::uint32_t i = 0; i < k; ++i) {
    f.id_matrix.push_back(i + 1);
    f.meta.push_back({i + 1, 1, kIgnoreId});
  }
  return MaskPack::create(std::move(f));
}

}  // namespace

TEST(SampleCount, RoundHalfUpWithFloorOfOne) {
  EXPECT_EQ(sample_count(3.0 / 5.0, 10), 6u);
  EXPECT_EQ(sample_count(1.0 / 3.0, 1), 1u);
  EXPECT_EQ(sample_count(0.5, 3), 2u);   // 1.5 rounds up
  EXPECT_EQ(sample_count(0.25, 2), 1u);  // 0.5 rounds up
  EXPECT_EQ(sample_count(0.01, 10), 1u);
  EXPECT_EQ(sample_count(1.0, 7), 7u);
  EXPECT_EQ(sample_count(4.0 / 5.0, 12), 10u);
}

TEST(SampleAndMerge, TenMasksThreeFifthsSelectsSix) {
  const MergedMask m = sample_and_merge(stripes(10), kProportionMedium, 1234);
  EXPECT_EQ(m.selected_ids.size(), 6u);
  // reference: partial Fisher-Yates over [1..10] with xoshiro256**(1234)
  EXPECT_EQ(m.selected_ids, (std::vector<std::uint32_t>{2, 3, 4, 7, 8, 10}));
  EXPECT_EQ(sample_and_merge(stripes(5), 2.0 / 5.0, 99).selected_ids, (std::vector<std::uint32_t>{1, 4}));
}

TEST(SampleAndMerge, SingleMaskAlwaysSelected) {
  const MergedMask m = sample_and_merge(stripes(1), kProportionSmall, 7);
  EXPECT_EQ(m.selected_ids, (std::vector<std::uint32_t>{1}));
}

TEST(SampleAndMerge, DeterministicPerSeed) {
  const MaskPack p = stripes(12);
  EXPECT_EQ(sample_and_merge(p, 0.5, 42), sample_and_merge(p, 0.5, 42));
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s)
    differing += sample_and_merge(p, 0.5, s).selected_ids != sample_and_merge(p, 0.5, s + 100).selected_ids;
  EXPECT_GT(differing, 10);
}

TEST(SampleAndMerge, Errors) {
  const MaskPack p = stripes(3);
  for (double bad : {0.0, -0.1, 1.0000001, std::nan("")}) {
    try {
      sample_and_merge(p, bad, 1);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::OutOfRange);
    }
  }
  const MaskPack empty = MaskPack::create({1, 2, 0, {0, 0}, {}, std::nullopt});
  try {
    sample_and_merge(empty, 0.5, 1);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyInput);
  }
}

TEST(SampleAndMerge, PixelSetEqualsUnionOfSampledMasks) {
  Gen g(8);
  for (int trial = 0; trial < 150; ++trial) {
    const FrameSize f{static_cast<std::uint32_t>(g.range(1, 64)), static_cast<std::uint32_t>(g.range(1, 64))};
    const MaskPack p = MaskPack::create(fmx::testing::random_mask_pack(g, f, static_cast<std::uint32_t>(g.range(1, 12))));
    const double r = g.uniform(0.01, 1.0);
    const MergedMask m = sample_and_merge(p, r, g.next());
    ASSERT_EQ(m.selected_ids.size(), sample_count(r, p.num_masks()));
    ASSERT_TRUE(std::is_sorted(m.selected_ids.begin(), m.selected_ids.end()));
    ASSERT_TRUE(std::adjacent_find(m.selected_ids.begin(), m.selected_ids.end()) == m.selected_ids.end());
    ASSERT_EQ(m.data, fmx::testing::oracle_merge(p.id_matrix(), m.selected_ids));
    std::vector<std::uint8_t> un(f.pixels(), 0);
    for (auto id : m.selected_ids) {
      const BinaryMask b = unpack_mask(p, id);
      for (std::size_t i = 0; i < un.size(); ++i) un[i] |= b.data[i];
    }
    ASSERT_EQ(m.data, un);
  }
}

TEST(SampleAndMerge, SelectionFrequencyWithinThreeSigma) {
  const MaskPack p = stripes(5);
  const int trials = 10000;
  std::vector<int> hits(6, 0);
  for (int s = 0; s < trials; ++s)
    for (auto id : sample_and_merge(p, 2.0 / 5.0, static_cast<std::uint64_t>(s)).selected_ids) ++hits[id];
  const double sigma = std::sqrt(trials * 0.4 * 0.6);
  for (int id = 1; id <= 5; ++id) EXPECT_LE(std::fabs(hits[id] - 0.4 * trials), 3 * sigma) << "mask " << id;
}

TEST(Remainder, NegationInvolutionAndPartition) {
  Gen g(4);
  const MaskPack p = MaskPack::create(fmx::testing::random_mask_pack(g, {9, 7}, 6));
  const MergedMask m = sample_and_merge(p, 0.5, 3);
  const MergedMask r = remainder(m);
  EXPECT_TRUE(r.selected_ids.empty());
  EXPECT_EQ(r.proportion, m.proportion);
  EXPECT_EQ(r.seed, m.seed);
  for (std::size_t i = 0; i < m.data.size(); ++i) EXPECT_EQ(m.at(i) + r.at(i), 1);
  EXPECT_EQ(remainder(r).data, m.data);
  EXPECT_EQ(remainder(full_mask({2, 3}, true)).data, full_mask({2, 3}, false).data);
}
