#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "frustummix/error.hpp"
#include "frustummix/label_fusion.hpp"
#include "frustummix/metrics.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace fmx;
using fmx::testing::Gen;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fmx::Error thrown";
  return Errc::Io;
}

std::filesystem::path mapping_file(const char* name) {
  return std::filesystem::path(FMX_SOURCE_DIR) / "mappings" / name;
}

ProbabilityMap row(std::vector<float> v) {
  const auto c = static_cast<std::uint16_t>(v.size());
  return ProbabilityMap::create({1, 1, c, std::move(v)});
}

const char* kCarBus =
    "# scenario: toy\n"
    "# semantic: vehicle other\n"
    "vfm_class\tvfm_id\tsemantic_id\n"
    "car\t0\t0\n"
    "bus\t1\t0\n"
    "tree\t3\t1\n";

}  // namespace

// --- ClassMapping -----------------------------------------------------------

TEST(ClassMapping, ParseAndSerializeRoundTrip) {
  const ClassMapping m = ClassMapping::parse(kCarBus);
  EXPECT_EQ(m.scenario_name(), "toy");
  EXPECT_EQ(m.num_semantic(), 2);
  EXPECT_EQ(m.entries().size(), 3u);
  EXPECT_EQ(m.min_vfm_classes(), 4);
  EXPECT_EQ(ClassMapping::parse(m.to_tsv()).fields(), m.fields());
}

TEST(ClassMapping, DuplicateVfmIdAndBadRows) {
  EXPECT_EQ(code_of([] { ClassMapping::parse(std::string(kCarBus) + "van\t1\t0\n"); }), Errc::DuplicateId);
  EXPECT_EQ(code_of([] { ClassMapping::parse(std::string(kCarBus) + "van\tx\t0\n"); }), Errc::Parse);
  EXPECT_EQ(code_of([] { ClassMapping::parse(std::string(kCarBus) + "van\t9\n"); }), Errc::Parse);
  EXPECT_EQ(code_of([] { ClassMapping::parse("car\t0\t0\n"); }), Errc::Parse);
  EXPECT_EQ(code_of([] { ClassMapping::parse(std::string(kCarBus) + "van\t9\t2\n"); }), Errc::InvalidValue);
}

TEST(ClassMapping, UncoveredClassMustBeDeclaredNotAvailable) {
  const std::string base =
      "# semantic: car parking\n"
      "vfm_class\tvfm_id\tsemantic_id\n"
      "car\t2\t0\n";
  EXPECT_EQ(code_of([&] { ClassMapping::parse(base); }), Errc::InvalidValue);
  EXPECT_NO_THROW(ClassMapping::parse("# na: parking\n" + base));
  EXPECT_EQ(code_of([&] { ClassMapping::parse("# na: car\n" + base); }), Errc::InvalidValue);
}

TEST(ClassMapping, ShippedScenarioFiles) {
  const ClassMapping a2d2 = ClassMapping::load(mapping_file("a2d2_semantickitti.tsv"));
  EXPECT_EQ(a2d2.semantic_names(),
            (std::vector<std::string>{"car", "truck", "bike", "person", "road", "parking", "sidewalk", "building",
                                      "nature", "other-objects"}));
  EXPECT_EQ(a2d2.fields().not_available, (std::vector<std::uint16_t>{5}));
  const ClassMapping vk = ClassMapping::load(mapping_file("vkitti_semantickitti.tsv"));
  EXPECT_EQ(vk.num_semantic(), 6);
  EXPECT_TRUE(vk.fields().not_available.empty());
  const ClassMapping nu = ClassMapping::load(mapping_file("nuscenes_lidarseg.tsv"));
  EXPECT_EQ(nu.num_semantic(), 6);
  EXPECT_EQ(nu.fields().not_available, (std::vector<std::uint16_t>{3}));
  for (const ClassMapping* m : {&a2d2, &vk, &nu}) EXPECT_LE(m->min_vfm_classes(), 133);
  // spot checks against the class tables
  auto sem = [](const ClassMapping& m, std::string_view vfm) {
    for (const auto& e : m.entries())
      if (e.vfm_class_name == vfm) return static_cast<int>(e.semantic_id);
    return -1;
  };
  EXPECT_EQ(sem(a2d2, "bus"), 0);
  EXPECT_EQ(sem(a2d2, "motorcycle"), 2);
  EXPECT_EQ(sem(a2d2, "pavement-merged"), 6);
  EXPECT_EQ(sem(a2d2, "sky-other-merged"), -1);
  EXPECT_EQ(sem(vk, "fire hydrant"), 3);
  EXPECT_EQ(sem(nu, "train"), 0);
  EXPECT_EQ(sem(nu, "house"), 4);
  EXPECT_EQ(sem(nu, "playingfield"), 2);
  EXPECT_EQ(code_of([] { ClassMapping::load(mapping_file("missing.tsv")); }), Errc::Io);
}

// --- softmax ----------------------------------------------------------------

TEST(Softmax, ClosedFormsAndShift) {
  const ProbabilityMap a = softmax(LogitMap::create({1, 1, 2, {0.0f, 0.0f}}));
  EXPECT_EQ(a.row(0)[0], 0.5f);
  const float c = 3.25f;
  const ProbabilityMap b = softmax(LogitMap::create({1, 1, 2, {c, c + static_cast<float>(std::log(3.0))}}));
  EXPECT_NEAR(b.row(0)[0], 0.25, 1e-6);
  EXPECT_NEAR(b.row(0)[1], 0.75, 1e-6);
  Gen g(1);
  const auto lf = fmx::testing::random_logits(g, 4, 4, 7);
  auto shifted = lf;
  for (auto& x : shifted.data) x += 7.0f;
  const ProbabilityMap p = softmax(LogitMap::create(lf)), q = softmax(LogitMap::create(shifted));
  for (std::size_t i = 0; i < p.data().size(); ++i) EXPECT_NEAR(p.data()[i], q.data()[i], 1e-6);
  for (std::size_t r = 0; r < p.positions(); ++r) {
    double s = 0;
    for (float x : p.row(r)) s += x;
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Softmax, ExtremeLogitsStayFinite) {
  const ProbabilityMap p = softmax(LogitMap::create({1, 1, 3, {1e30f, -1e30f, 0.0f}}));
  EXPECT_EQ(p.row(0)[0], 1.0f);
  EXPECT_EQ(p.row(0)[1], 0.0f);
}

// --- remap ------------------------------------------------------------------

TEST(Remap, HandSummation) {
  const ClassMapping m = ClassMapping::parse(kCarBus);
  const RemappedProbs r = remap_vfm_probs(row({0.3f, 0.4f, 0.3f, 0.0f}), m);
  EXPECT_NEAR(r.semantic.data[0], 0.7, 1e-6);
  EXPECT_EQ(r.semantic.data[1], 0.0f);
  EXPECT_NEAR(r.unmapped_mass[0], 0.3, 1e-6);
  const RemappedProbs all_unmapped = remap_vfm_probs(row({0.0f, 0.0f, 1.0f, 0.0f}), m);
  EXPECT_EQ(all_unmapped.semantic.data, (std::vector<float>{0.0f, 0.0f}));
  EXPECT_EQ(all_unmapped.unmapped_mass[0], 1.0f);
}

TEST(Remap, BijectionIsPermutation) {
  const ClassMapping m = ClassMapping::parse(
      "# semantic: a b c\nvfm_class\tvfm_id\tsemantic_id\nx\t0\t2\ny\t1\t0\nz\t2\t1\n");
  const RemappedProbs r = remap_vfm_probs(row({0.125f, 0.25f, 0.625f}), m);
  EXPECT_EQ(r.semantic.data, (std::vector<float>{0.25f, 0.625f, 0.125f}));
  EXPECT_EQ(r.unmapped_mass[0], 0.0f);
}

TEST(Remap, MassConservedOnShippedMapping) {
  const ClassMapping m = ClassMapping::load(mapping_file("nuscenes_lidarseg.tsv"));
  Gen g(2);
  const ProbabilityMap p = ProbabilityMap::create(fmx::testing::random_probabilities(g, 8, 8, 133, 0.3));
  const RemappedProbs r = remap_vfm_probs(p, m);
  for (std::size_t i = 0; i < p.positions(); ++i) {
    double s = r.unmapped_mass[i], in = 0;
    for (std::size_t k = 0; k < m.num_semantic(); ++k) s += r.semantic.data[i * m.num_semantic() + k];
    for (float x : p.row(i)) in += x;
    EXPECT_NEAR(s, in, 1e-6);
  }
}

TEST(Remap, ProbabilitiesMustCoverMappedIds) {
  EXPECT_EQ(code_of([] { remap_vfm_probs(row({0.5f, 0.5f}), ClassMapping::parse(kCarBus)); }), Errc::UnknownClass);
}

// --- fuse / hard ------------------------------------------------------------

TEST(FusePl, HandExamples) {
  const auto net = row({0.5f, 0.5f}), vfm = row({0.1f, 0.9f});
  EXPECT_EQ(fuse_pl(net.fields(), vfm.fields(), std::vector<float>{0.0f}).at(0), 1);
  EXPECT_EQ(fuse_pl(row({1, 0}).fields(), row({1, 0}).fields(), {}).at(0), 0);
  EXPECT_EQ(fuse_pl(net.fields(), vfm.fields(), std::vector<float>{0.9f}, 0.5).at(0), kIgnoreId);
  EXPECT_EQ(fuse_pl(net.fields(), vfm.fields(), std::vector<float>{0.5f}, 0.5).at(0), 1);  // not > tau
  EXPECT_EQ(fuse_pl(row({0.5f, 0.5f}).fields(), row({0.5f, 0.5f}).fields(), {}).at(0), 0);  // tie -> lowest
}

TEST(FusePl, TauZeroIgnoresAnyUnmappedMass) {
  const auto net = row({0.5f, 0.5f}), vfm = row({0.1f, 0.9f});
  EXPECT_EQ(fuse_pl(net.fields(), vfm.fields(), std::vector<float>{1e-7f}, 0.0).at(0), kIgnoreId);
  EXPECT_EQ(fuse_pl(net.fields(), vfm.fields(), std::vector<float>{0.0f}, 0.0).at(0), 1);
}

TEST(FusePl, Errors) {
  const auto two = row({0.5f, 0.5f}), three = row({0.2f, 0.3f, 0.5f});
  EXPECT_EQ(code_of([&] { fuse_pl(two.fields(), three.fields(), {}); }), Errc::DimensionMismatch);
  EXPECT_EQ(code_of([&] { fuse_pl(two.fields(), two.fields(), std::vector<float>{0, 0}); }), Errc::DimensionMismatch);
  EXPECT_EQ(code_of([&] { fuse_pl(two.fields(), two.fields(), {}, 1.5); }), Errc::OutOfRange);
  ClassMapFields neg = two.fields();
  neg.data[0] = -0.1f;
  EXPECT_EQ(code_of([&] { fuse_pl(neg, two.fields(), {}); }), Errc::InvalidValue);
}

TEST(FusePl, BruteForceSymmetryAndEnsembleAgreement) {
  Gen g(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto h = static_cast<std::uint32_t>(g.range(1, 16)), w = static_cast<std::uint32_t>(g.range(1, 16));
    const auto c = static_cast<std::uint16_t>(g.range(1, 10));
    const auto a = fmx::testing::random_probabilities(g, h, w, c, 0.2);
    const auto b = fmx::testing::random_probabilities(g, h, w, c, 0.2);
    std::vector<float> un(std::size_t{h} * w);
    for (auto& u : un) u = g.unit_f();
    const double tau = g.unit();
    const LabelMap got = fuse_pl(a, b, un, tau);
    ASSERT_TRUE(std::ranges::equal(got.data(), fmx::testing::oracle_fuse(a, b, un, tau)));
    ASSERT_EQ(got, fuse_pl(b, a, un, tau));
    // without ignore, fusion is the argmax of the ensemble
    const LabelMap plain = fuse_pl(a, b, {});
    const LabelMap ens = hard_pl(ensemble(ProbabilityMap::create(a), ProbabilityMap::create(b)));
    std::size_t differ = 0;
    for (std::size_t i = 0; i < plain.data().size(); ++i) differ += plain.at(i) != ens.at(i);
    ASSERT_EQ(differ, 0u);
  }
}

TEST(FusePl, LogitShiftInvariance) {
  Gen g(4);
  const ClassMapping m = ClassMapping::parse(kCarBus);
  for (int trial = 0; trial < 100; ++trial) {
    auto net = fmx::testing::random_logits(g, 6, 6, 2);
    auto vfm = fmx::testing::random_logits(g, 6, 6, 4);
    auto net2 = net, vfm2 = vfm;
    for (std::size_t p = 0; p < 36; ++p) {
      const auto dn = static_cast<float>(static_cast<int>(g.range(0, 40)) - 20);
      const auto dv = static_cast<float>(static_cast<int>(g.range(0, 40)) - 20);
      for (int k = 0; k < 2; ++k) net2.data[p * 2 + k] += dn;
      for (int k = 0; k < 4; ++k) vfm2.data[p * 4 + k] += dv;
    }
    const auto run = [&](const ClassMapFields& n, const ClassMapFields& v) {
      return fuse_pl(softmax(LogitMap::create(n)), remap_vfm_probs(softmax(LogitMap::create(v)), m), 0.5);
    };
    ASSERT_EQ(run(net, vfm), run(net2, vfm2));
  }
}

TEST(HardPl, ArgmaxWithLowestTie) {
  EXPECT_EQ(hard_pl(row({0.2f, 0.5f, 0.3f})).at(0), 1);
  EXPECT_EQ(hard_pl(row({1 / 3.f, 1 / 3.f, 1 / 3.f})).at(0), 0);
  EXPECT_EQ(hard_pl(row({0, 0, 1})).at(0), 2);
}
