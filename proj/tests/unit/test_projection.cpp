#include <gtest/gtest.h>

#include <cmath>

#include "frustummix/error.hpp"
#include "frustummix/projection.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fmx;
using fmx::testing::Gen;

namespace {

CameraModel pinhole100() {
  CameraFields c{100, 100, 32, 32, {}};
  c.extrinsic = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  return CameraModel::create(c);
}

PointCloud cloud(std::vector<float> xyz) {
  const auto n = static_cast<std::uint32_t>(xyz.size() / 3);
  return PointCloud::create({n, std::move(xyz), std::nullopt});
}

}  // namespace

TEST(Project, PrincipalRayAndOffsetPoint) {
  const PointImage pi = project(cloud({0, 0, 5, 1, 0, 5, 0, 0, -1}), pinhole100(), {64, 64});
  ASSERT_EQ(pi.count(), 3u);
  ASSERT_TRUE(pi.is_valid(0));
  EXPECT_EQ(*pi.pixel(0), (Pixel{32, 32}));
  EXPECT_EQ(*pi.depth(0), 5.0f);
  EXPECT_EQ(*pi.pixel(1), (Pixel{52, 32}));
  EXPECT_FALSE(pi.is_valid(2));
}

TEST(Project, HalfUpRoundingAndFrameEdge) {
  // z = 1.5625 and x in 1/128 steps keep u = 100 * x / z + 32 exact.
  const float z = 1.5625f;
  const PointImage pi = project(cloud({1 / 128.f, 0, z, -1 / 128.f, 0, z, -65 / 128.f, 0, z, -0.51f, 0, z, 63 / 128.f, 0, z}),
                                pinhole100(), {64, 64});
  EXPECT_EQ(pi.pixel(0)->u, 33u);  // 32.5
  EXPECT_EQ(pi.pixel(1)->u, 32u);  // 31.5
  EXPECT_EQ(pi.pixel(2)->u, 0u);   // -0.5
  EXPECT_FALSE(pi.is_valid(3));    // -0.64 -> -1
  EXPECT_FALSE(pi.is_valid(4));    // 63.5 -> 64 == width
}

TEST(Project, DepthCullAtMinimum) {
  const PointImage pi = project(cloud({0, 0, 0x1p-10f, 0, 0, 0.0011f, 0, 0, 0}), pinhole100(), {64, 64});
  EXPECT_FALSE(pi.is_valid(0));
  EXPECT_TRUE(pi.is_valid(1));
  EXPECT_FALSE(pi.is_valid(2));
}

TEST(Project, MatchesOracleAndKeepsAlignment) {
  Gen g(31);
  for (int trial = 0; trial < 100; ++trial) {
    const FrameSize f{static_cast<std::uint32_t>(g.range(1, 64)), static_cast<std::uint32_t>(g.range(1, 64))};
    const CameraFields cf = fmx::testing::random_camera(g, f);
    const CameraModel cam = CameraModel::create(cf);
    const auto pcf = fmx::testing::cloud_in_view(g, cam, f, static_cast<std::uint32_t>(g.range(0, 300)), false, 3);
    const PointImage pi = project(PointCloud::create(pcf), cam, f);
    ASSERT_EQ(pi.count(), pcf.count);
    const auto o = fmx::testing::oracle_project(pcf, cf, f);
    for (std::size_t i = 0; i < pcf.count; ++i) {
      ASSERT_EQ(pi.is_valid(i), o.valid[i]);
      if (!o.valid[i]) continue;
      ASSERT_EQ(*pi.pixel(i), (Pixel{o.u[i], o.v[i]}));
      ASSERT_EQ(*pi.depth(i), o.depth[i]);
    }
  }
}

TEST(Project, EnlargingFrameNeverInvalidates) {
  Gen g(32);
  for (int trial = 0; trial < 50; ++trial) {
    const FrameSize small{static_cast<std::uint32_t>(g.range(1, 40)), static_cast<std::uint32_t>(g.range(1, 40))};
    const FrameSize big{small.height + static_cast<std::uint32_t>(g.range(0, 20)),
                        small.width + static_cast<std::uint32_t>(g.range(0, 20))};
    const CameraModel cam = CameraModel::create(fmx::testing::random_camera(g, small));
    const PointCloud pc = PointCloud::create(fmx::testing::cloud_in_view(g, cam, small, 200, false, 3));
    const PointImage a = project(pc, cam, small), b = project(pc, cam, big);
    for (std::size_t i = 0; i < pc.count(); ++i)
      if (a.is_valid(i)) {
        ASSERT_TRUE(b.is_valid(i));
        ASSERT_EQ(a.pixel(i), b.pixel(i));
      }
  }
}

TEST(Project, ReprojectionWithinHalfPixelBound) {
  Gen g(33);
  std::size_t checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const FrameSize f{48, 64};
    const CameraModel cam = CameraModel::create(fmx::testing::random_camera(g, f, true));
    const PointCloud pc = PointCloud::create(fmx::testing::cloud_in_view(g, cam, f, 200, false, 3));
    const PointImage pi = project(pc, cam, f);
    for (std::size_t i = 0; i < pc.count(); ++i) {
      if (!pi.is_valid(i)) continue;
      const double d = *pi.depth(i);
      const auto truth = to_camera_frame(cam, pc.point(i));
      const auto back = unproject_to_camera(cam, *pi.pixel(i), d);
      const double bound = 0.5 * d / cam.fx() + 1e-5;
      for (int k = 0; k < 3; ++k) ASSERT_LE(std::fabs(back[k] - truth[k]), bound) << "point " << i << " axis " << k;
      // world-frame inverse agrees with the camera-frame one through R^T
      const auto w = unproject(cam, *pi.pixel(i), d);
      const auto again = to_camera_frame(cam, {static_cast<float>(w[0]), static_cast<float>(w[1]), static_cast<float>(w[2])});
      for (int k = 0; k < 3; ++k) ASSERT_NEAR(again[k], back[k], 1e-3);
      ++checked;
    }
  }
  EXPECT_GT(checked, 3000u);
}

TEST(LabelsToPoints, LookupIgnoreAndSharedPixels) {
  const PointImage pi = project(cloud({0, 0, 5, 0, 0, 10, 0, 0, -1}), pinhole100(), {64, 64});
  LabelMapFields lf{64, 64, 4, std::vector<std::uint16_t>(64 * 64, 0)};
  lf.data[32 * 64 + 32] = 3;
  const auto labels = labels_to_points(pi, LabelMap::create(lf));
  EXPECT_EQ(labels, (std::vector<std::uint16_t>{3, 3, kIgnoreId}));
  try {
    labels_to_points(pi, LabelMap::create({2, 2, 4, {0, 0, 0, 0}}));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionMismatch);
  }
}
