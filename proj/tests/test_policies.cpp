#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace {

using namespace terrasemi;

TEST(WeakPolicy, DegenerateConfigIsIdentity) {
  Rng rng(1, 1);
  WeakPolicyConfig cfg;
  cfg.crop_distortion = 0.0;
  cfg.jitter_prob = 0.0;
  cfg.flips = {0.0, 0.0, false};
  const auto img = tst::random_image(rng, 9, 7, rgb_bands());
  const auto labels = tst::random_labels(rng, 9, 7, 3);
  const auto r = weak_augment(img, &labels, cfg, rng);
  EXPECT_TRUE(tst::same_pixels(r.image, img));
  EXPECT_EQ(*r.labels, labels);
}

TEST(WeakPolicy, LabelsFollowTheImageRecord) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed, 3);
    WeakPolicyConfig cfg;
    cfg.crop_out = {12, 12};
    const auto img = tst::random_image(rng, 16, 20, rgbn_bands());
    const auto labels = tst::random_labels(rng, 16, 20, 4);
    const auto r = weak_augment(img, &labels, cfg, rng);
    ASSERT_EQ(r.image.height(), 12u);
    ASSERT_EQ(*r.labels, tst::oracle_replay_labels(r.record, labels));
    ASSERT_TRUE(r.record.ops.size() >= 1 && std::holds_alternative<Crop>(r.record.ops[0]));
    const Crop& c = std::get<Crop>(r.record.ops[0]);
    EXPECT_TRUE(c.src_h >= 6 && c.src_h <= 18);
  }
}

TEST(WeakPolicy, RejectsMismatchedLabels) {
  Rng rng(2, 2);
  const MultiBandImage img(8, 8, rgb_bands());
  const LabelMap labels(8, 9, 2);
  EXPECT_THROW(weak_augment(img, &labels, {}, rng), Error);
}

TEST(SimclrPolicy, AllGatesOffIsIdentity) {
  Rng rng(3, 3);
  SimclrPolicyConfig cfg;
  cfg.crop_distortion = 0.0;
  cfg.flips = {0.0, 0.0, false};
  cfg.jitter_prob = cfg.drop_prob = cfg.blur_prob = 0.0;
  const auto img = tst::random_image(rng, 10, 10, rgb_bands());
  const auto [a, b] = simclr_views(img, cfg, rng);
  EXPECT_TRUE(tst::same_pixels(a, img));
  EXPECT_TRUE(tst::same_pixels(b, img));
}

TEST(SimclrPolicy, ViewsDifferAlmostAlways) {
  SimclrPolicyConfig cfg;
  cfg.crop_out = {16, 16};
  int differ = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Rng rng(t, 4);
    const auto img = tst::random_image(rng, 24, 24, rgb_bands());
    const auto [a, b] = simclr_views(img, cfg, rng);
    differ += !tst::same_pixels(a, b);
  }
  EXPECT_GE(differ, 990);
}

TEST(SimclrPolicy, SarPresetConstants) {
  const auto p = sen1floods11_preset();
  EXPECT_DOUBLE_EQ(p.policy.simclr.jitter_prob, 0.85);
  EXPECT_EQ(p.policy.simclr.drop_mode, DropMode::kNoop);
  Rng rng(5, 5);
  SimclrPolicyConfig cfg = p.policy.simclr;
  cfg.crop_out = {8, 8};
  const auto [a, b] = simclr_views(tst::random_image(rng, 12, 12, sar_bands()), cfg, rng);
  EXPECT_EQ(a.bands(), sar_bands());
}

TEST(StrongTable, TranscriptionDigest) {
  const auto t = default_strong_table();
  ASSERT_EQ(t.rows.size(), 25u);
  EXPECT_EQ(table_digest(t), kStrongTableDigest);
  EXPECT_EQ(t.rows[0].first.fn, AugFn::kEqualize);
  EXPECT_DOUBLE_EQ(t.rows[0].first.prob, 0.8);
  EXPECT_DOUBLE_EQ(t.rows[0].first.strength, 0.1);
  EXPECT_EQ(t.rows[0].second.fn, AugFn::kShearY);
  EXPECT_EQ(t.rows[24].second.fn, AugFn::kRotate);
  EXPECT_DOUBLE_EQ(t.rows[24].second.strength, 0.5);
}

TEST(StrongTable, JsonRoundTripAndDigestCheck) {
  const auto t = default_strong_table();
  const auto j = nlohmann::json::parse(to_json(t).dump());
  EXPECT_EQ(table_digest(strong_table_from_json(j)), kStrongTableDigest);
  auto edited = j;
  edited["rows"][3][0]["prob"] = 0.5;
  EXPECT_THROW(strong_table_from_json(edited), Error);
  EXPECT_NO_THROW(strong_table_from_json(edited, false));
}

TEST(StrongTable, FunctionNamesParseCaseInsensitively) {
  EXPECT_EQ(parse_aug_fn("solarizeadd"), AugFn::kSolarizeAdd);
  EXPECT_EQ(parse_aug_fn("AutoContrast"), AugFn::kAutoContrast);
  EXPECT_THROW(parse_aug_fn("Sharpness"), Error);
  for (const auto& [fn, name] : kAugFnNames) EXPECT_EQ(parse_aug_fn(name), fn);
}

TEST(StrongPolicy, MagnitudeMapping) {
  MagnitudeMap m;
  EXPECT_EQ(m.posterize_bits(0.0), 8);
  EXPECT_EQ(m.posterize_bits(0.6), 6);
  EXPECT_EQ(m.posterize_bits(1.0), 4);
  EXPECT_EQ(m.solarize_threshold(0.0), 255);
  EXPECT_EQ(m.solarize_threshold(0.3), 179);
  EXPECT_EQ(m.solarize_add_amount(0.3), 33);
}

TEST(StrongPolicy, ForcedFirstRow) {
  Rng rng(6, 6);
  const auto img = tst::random_image(rng, 12, 12, rgb_bands());
  const StrongRow row{{AugFn::kEqualize, 1.0, 0.1}, {AugFn::kShearY, 1.0, 0.4}};
  CutoutConfig cut;
  cut.n_rects = 0;
  const auto r = strong_augment_row(img, row, MagnitudeMap{}, cut, rng);
  ASSERT_EQ(r.record.ops.size(), 1u);
  const auto* shear = std::get_if<ShearY>(&r.record.ops[0]);
  ASSERT_NE(shear, nullptr);
  EXPECT_NEAR(std::abs(shear->rate), 0.12, 1e-12);
  EXPECT_TRUE(tst::same_pixels(r.image, apply_primitive(equalize(img), *shear)));
  EXPECT_TRUE(r.cut_rects.empty());
}

TEST(StrongPolicy, GatedOffRowIsIdentity) {
  Rng rng(7, 7);
  const auto img = tst::random_image(rng, 8, 8, rgb_bands());
  const StrongRow row{{AugFn::kInvert, 0.0, 0.5}, {AugFn::kRotate, 0.0, 0.5}};
  CutoutConfig cut;
  cut.n_rects = 0;
  const auto r = strong_augment_row(img, row, MagnitudeMap{}, cut, rng);
  EXPECT_TRUE(tst::same_pixels(r.image, img));
  EXPECT_EQ(r.record.size(), 0u);
}

TEST(StrongPolicy, RowSelectionIsUniform) {
  const auto table = default_strong_table();
  std::vector<int> counts(25, 0);
  const MultiBandImage img(4, 4, rgb_bands());
  for (std::uint64_t t = 0; t < 10000; ++t) {
    Rng rng(t, 8);
    ++counts[strong_augment(img, table, MagnitudeMap{}, CutoutConfig{}, rng).row];
  }
  const double expect = 400.0, sigma = std::sqrt(10000 * (1.0 / 25) * (24.0 / 25));
  double chi2 = 0;
  for (int c : counts) {
    EXPECT_LT(std::abs(c - expect), 3 * sigma);
    chi2 += (c - expect) * (c - expect) / expect;
  }
  EXPECT_LT(chi2, 51.2);  // 99.9th percentile, 24 dof
}

TEST(StrongPolicy, RecordDoesNotDependOnImageContent) {
  const auto table = default_strong_table();
  for (std::uint64_t t = 0; t < 300; ++t) {
    Rng src(t, 9);
    const auto x = tst::random_image(src, 10, 10, rgb_bands());
    const auto y = tst::random_image(src, 10, 10, rgb_bands());
    Rng a(t, 10), b(t, 10);
    const auto sx = strong_augment(x, table, MagnitudeMap{}, CutoutConfig{}, a);
    const auto sy = strong_augment(y, table, MagnitudeMap{}, CutoutConfig{}, b);
    ASSERT_EQ(sx.record, sy.record);
    ASSERT_EQ(sx.cut_rects, sy.cut_rects);
    ASSERT_EQ(sx.row, sy.row);
  }
}

TEST(StrongPolicy, GeometricRowsReplayExactly) {
  StrongAugTable geo;
  for (const auto& row : default_strong_table().rows)
    if (is_geometric(row.first.fn) && is_geometric(row.second.fn)) geo.rows.push_back(row);
  ASSERT_FALSE(geo.rows.empty());
  CutoutConfig cut;
  cut.n_rects = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng(t, 11);
    const auto img = tst::random_image(rng, 9, 11, rgb_bands());
    const auto s = strong_augment(img, geo, MagnitudeMap{}, cut, rng);
    ASSERT_TRUE(tst::same_pixels(s.image, replay_on_image(s.record, img)));
  }
}

TEST(Cutout, ForcedRectangleAndBounds) {
  Rng rng(11, 11);
  const MultiBandImage ones(20, 20, generic_bands(1), std::vector<float>(400, 1.0f));
  const auto filled = fill_rects(ones, {Rect{3, 4, 2, 5}}, 0.0f);
  for (std::size_t y = 0; y < 20; ++y)
    for (std::size_t x = 0; x < 20; ++x) {
      const bool inside = y >= 3 && y < 5 && x >= 4 && x < 9;
      EXPECT_EQ(filled.at(y, x, 0), inside ? 0.0f : 1.0f);
    }
  CutoutConfig cut;
  const std::size_t side = cutout_side({20, 20}, cut.rect_frac);
  EXPECT_EQ(side, 2u);
  for (int t = 0; t < 500; ++t) {
    const auto [img, rects] = cutout_multi(ones, cut, rng);
    std::size_t erased = 0;
    for (float v : img.data()) erased += v == 0.0f;
    EXPECT_LE(erased, cut.n_rects * side * side);
    for (const Rect& r : rects) {
      EXPECT_LE(r.top + r.height, 20u);
      EXPECT_LE(r.left + r.width, 20u);
    }
  }
}

TEST(Cutout, ZeroRectsIsIdentity) {
  Rng rng(12, 12);
  const auto img = tst::random_image(rng, 6, 6, rgb_bands());
  CutoutConfig cut;
  cut.n_rects = 0;
  EXPECT_TRUE(tst::same_pixels(cutout_multi(img, cut, rng).first, img));
}

TEST(StrongPolicy, NonRgbColorUsesGeneralJitter) {
  Rng rng(13, 13);
  const auto img = tst::random_image(rng, 6, 6, sar_bands());
  GeomRecord rec = GeomRecord::identity({6, 6});
  for (AugFn fn : {AugFn::kColor, AugFn::kHue, AugFn::kSaturation})
    EXPECT_NO_THROW(apply_strong_fn(img, fn, 0.9, MagnitudeMap{}, rng, rec));
  EXPECT_EQ(rec.size(), 0u);
}

TEST(PolicyConfigFile, OverridesSelectedKeys) {
  const auto j = nlohmann::json::parse(
      R"({"weak": {"crop_out": [64, 32], "jitter_prob": 0.25},
          "simclr": {"drop_mode": "channel_mean", "sigma": [0.2, 1.0]},
          "strong": {"n_rects": 6, "rect_frac": 0.05}})");
  const auto cfg = policy_from_json(j);
  EXPECT_EQ(cfg.weak.crop_out, (Dims{64, 32}));
  EXPECT_DOUBLE_EQ(cfg.weak.jitter_prob, 0.25);
  EXPECT_DOUBLE_EQ(cfg.weak.jitter_strength, 0.4);
  EXPECT_EQ(cfg.simclr.drop_mode, DropMode::kChannelMean);
  EXPECT_DOUBLE_EQ(cfg.simclr.blur_cfg.sigma_max, 1.0);
  EXPECT_EQ(cfg.cutout.n_rects, 6u);
  EXPECT_THROW(policy_from_json(nlohmann::json::parse(R"({"simclr": {"drop_mode": "sepia"}})")), Error);
}

}  // namespace
