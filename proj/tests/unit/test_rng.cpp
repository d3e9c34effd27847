#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "frustummix/exact_sum.hpp"
#include "frustummix/rng.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fmx;

// Reference values computed from the published splitmix64 / xoshiro256**
// definitions with arbitrary-precision integers.
TEST(Rng, Splitmix64KnownValue) {
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64_next(s), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, XoshiroKnownSequence) {
  Xoshiro256ss a(0);
  EXPECT_EQ(a(), 0x99EC5F36CB75F2B4ULL);
  EXPECT_EQ(a(), 0xBF6E1F784956452AULL);
  EXPECT_EQ(a(), 0x1A5F849D4933E6E0ULL);
  Xoshiro256ss b(42);
  EXPECT_EQ(b(), 0x15780B2E0C2EC716ULL);
  EXPECT_EQ(b(), 0x6104D9866D113A7EULL);
  EXPECT_EQ(b(), 0xAE17533239E499A1ULL);
}

TEST(Rng, DeriveSeedKnownValues) {
  EXPECT_EQ(derive_seed(42, 0), 0x57E1FABA65107204ULL);
  EXPECT_EQ(derive_seed(42, 1), 0x79C32CD79CCD877EULL);
  EXPECT_EQ(derive_seed(0, 7), 0xCC6553B5A9426EA5ULL);
  static_assert(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST(Rng, BelowStaysInRangeAndHitsEveryValue) {
  Xoshiro256ss r(5);
  std::array<int, 7> hits{};
  for (int i = 0; i < 7000; ++i) {
    const auto x = r.below(7);
    ASSERT_LT(x, 7u);
    ++hits[x];
  }
  for (int h : hits) EXPECT_GT(h, 800);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Rng, UsableWithStdAlgorithms) {
  Xoshiro256ss r(9);
  std::vector<int> v{1, 2, 3, 4};
  std::shuffle(v.begin(), v.end(), r);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<int>{1, 2, 3, 4}));
}

// ---------------------------------------------------------------------------

TEST(ExactSum, CancellationIsExact) {
  ExactSum s;
  s.add(1e300);
  s.add(1.0);
  s.add(-1e300);
  EXPECT_EQ(s.value(), 1.0);
  ExactSum t;
  t.add(0.1);
  t.add(0.2);
  t.add(-0.3);
  // 0.1 + 0.2 - 0.3 in exact binary arithmetic
  EXPECT_EQ(t.value(), 2.7755575615628914e-17);
}

TEST(ExactSum, ProductsAreExact) {
  ExactSum s;
  s.add_product(1.0 + 0x1p-30, 1.0 + 0x1p-30);  // 1 + 2^-29 + 2^-60
  s.add(-1.0);
  s.add(-0x1p-29);
  EXPECT_EQ(s.value(), 0x1p-60);
}

TEST(ExactSum, MatchesRationalOracle) {
  fmx::testing::Gen g(77);
  for (int trial = 0; trial < 300; ++trial) {
    ExactSum s;
    std::vector<double> plain;
    std::vector<std::pair<double, double>> prods;
    const int n = static_cast<int>(g.range(1, 30));
    for (int i = 0; i < n; ++i) {
      const double x = std::ldexp(g.uniform(-1.0, 1.0), static_cast<int>(g.range(0, 80)) - 40);
      if (g.chance(0.5)) {
        const double y = g.uniform(0.0, 4.0);
        s.add_product(x, y);
        prods.emplace_back(x, y);
      } else {
        s.add(x);
        plain.push_back(x);
      }
    }
    ASSERT_TRUE(fmx::testing::exact_sum_equals(s.parts(), plain, prods)) << "trial " << trial;
    // parts are non-overlapping and increasing, so value() is within an ulp
    const auto parts = s.parts();
    for (std::size_t i = 1; i < parts.size(); ++i) ASSERT_LT(std::fabs(parts[i - 1]), std::fabs(parts[i]));
  }
}

TEST(ExactSum, EqualityAndSubtraction) {
  ExactSum a, b;
  a.add(0.1);
  a.add(0.2);
  b.add(0.2);
  b.add(0.1);
  EXPECT_TRUE(a == b);
  EXPECT_TRUE((a - b).is_zero());
  b.add(1e-300);
  EXPECT_FALSE(a == b);
}
