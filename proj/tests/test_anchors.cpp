// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "aerotrack/anchors.hpp"
#include "aerotrack/error.hpp"
#include "support/oracles.hpp"

namespace aerotrack::anchors {
namespace {

using aerotrack::testing::Rng;

// Label every anchor by scanning every gt: max IoU, lowest gt index on ties.
struct Scan {
  std::vector<AnchorLabel> labels;
  std::vector<int> best_gt;
  std::vector<double> gt_best;
};

Scan exhaustive_scan(const AnchorSet& set, const std::vector<BoundingBox>& gt, double pos, double neg) {
  Scan s;
  s.gt_best.assign(gt.size(), 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const BoundingBox& a = set.at(i).box;
    double best = 0.0;
    int arg = -1;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double v = aerotrack::testing::reference_iou(a, gt[g]);
      s.gt_best[g] = std::max(s.gt_best[g], v);
      if (v > best) {
        best = v;
        arg = static_cast<int>(g);
      }
    }
    s.best_gt.push_back(arg);
    s.labels.push_back(arg < 0 || best < neg ? AnchorLabel::kNegative
                       : best >= pos         ? AnchorLabel::kPositive
                                             : AnchorLabel::kIgnore);
  }
  return s;
}

TEST(GenerateAnchors, CountOn256Image) {
  // locations 32^2 + 16^2 + 8^2 + 4^2 + 2^2 = 1364, nine anchors each
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {256, 256});
  EXPECT_EQ(set.size(), 12276u);
  EXPECT_EQ(set.level_offsets().back(), 12276u);
}

TEST(GenerateAnchors, CountUsesCeilingGrid) {
  const AnchorConfig config = AnchorConfig::dense();
  const AnchorSet set = generate_anchors(config, {100, 75});
  for (std::size_t l = 0; l < set.levels.size(); ++l) {
    const double stride = config.strides[l];
    const std::size_t expect = static_cast<std::size_t>(std::ceil(100 / stride) * std::ceil(75 / stride)) * 18;
    EXPECT_EQ(set.levels[l].anchors.size(), expect) << "level " << l;
  }
}

TEST(GenerateAnchors, P3SquareUnitScaleIs32) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {64, 64});
  const LevelAnchors& p3 = set.levels.front();
  // ratio index 1 is 1:1, scale index 0 is 2^0
  const Anchor& a = p3.anchors[p3.index_of(0, 0, 1 * 3 + 0)];
  EXPECT_EQ(a.ratio_index, 1);
  EXPECT_EQ(a.scale_index, 0);
  EXPECT_EQ(a.box.width, 32.0);
  EXPECT_EQ(a.box.height, 32.0);
  EXPECT_EQ(a.box.area(), 32.0 * 32.0);
  EXPECT_EQ(a.box.center_x(), 4.0);
  EXPECT_EQ(a.box.center_y(), 4.0);
}

TEST(GenerateAnchors, DenseHasEighteenPerLocation) {
  EXPECT_EQ(AnchorConfig::dense().anchors_per_location(), 18u);
  EXPECT_EQ(AnchorConfig::baseline().anchors_per_location(), 9u);
}

TEST(GenerateAnchors, ShapesPreserveAreaAndRatio) {
  const AnchorConfig config = AnchorConfig::dense();
  const AnchorSet set = generate_anchors(config, {32, 32});
  for (std::size_t l = 0; l < set.levels.size(); ++l) {
    for (const Anchor& a : set.levels[l].anchors) {
      const double side = config.base_sizes[l] * config.scales[a.scale_index];
      EXPECT_NEAR(a.box.area(), side * side, 1e-9 * side * side);
      EXPECT_NEAR(a.box.width / a.box.height, config.aspect_ratios[a.ratio_index], 1e-12);
      EXPECT_GE(a.box.area(), side * side);
    }
  }
}

TEST(GenerateAnchors, CentersOnCellsAndTranslationCovariant) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {300, 200});
  for (const LevelAnchors& level : set.levels) {
    for (int gy = 0; gy < level.grid_height; ++gy) {
      for (int gx = 0; gx < level.grid_width; ++gx) {
        for (std::size_t k = 0; k < level.anchors_per_location; ++k) {
          const Anchor& a = level.anchors[level.index_of(gx, gy, k)];
          ASSERT_NEAR(a.box.center_x(), (gx + 0.5) * level.stride, 1e-9);
          ASSERT_NEAR(a.box.center_y(), (gy + 0.5) * level.stride, 1e-9);
          ASSERT_EQ(a.grid_x, gx);
          ASSERT_EQ(a.grid_y, gy);
          if (gx + 1 < level.grid_width) {
            const Anchor& b = level.anchors[level.index_of(gx + 1, gy, k)];
            ASSERT_NEAR(b.box.left - a.box.left, level.stride, 1e-9);
            ASSERT_EQ(b.box.width, a.box.width);
          }
        }
      }
    }
  }
}

TEST(GenerateAnchors, AnchorsAreNotClipped) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {64, 64});
  double min_left = 0.0;
  for (const auto& level : set.levels) {
    for (const auto& a : level.anchors) min_left = std::min(min_left, a.box.left);
  }
  EXPECT_LT(min_left, -300.0);
}

TEST(GenerateAnchors, RejectsBadConfig) {
  AnchorConfig config = AnchorConfig::baseline();
  config.scales.clear();
  EXPECT_THROW(generate_anchors(config, {64, 64}), ValidationError);
  config = AnchorConfig::baseline();
  config.aspect_ratios.clear();
  EXPECT_THROW(generate_anchors(config, {64, 64}), ValidationError);
  config = AnchorConfig::baseline();
  config.strides = {8, 16, 16, 64, 128};
  EXPECT_THROW(generate_anchors(config, {64, 64}), ValidationError);
  EXPECT_THROW(generate_anchors(AnchorConfig::baseline(), {0, 64}), ValidationError);
}

TEST(AssignAnchors, GtEqualToAnchorIsPositive) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {128, 128});
  const std::size_t pick = 777;
  const std::vector<BoundingBox> gt = {set.at(pick).box};
  const auto result = assign_anchors(set, gt);
  EXPECT_EQ(result.labels[pick], AnchorLabel::kPositive);
  EXPECT_EQ(result.max_iou[pick], 1.0);
  EXPECT_EQ(result.gt_best_iou[0], 1.0);
  EXPECT_EQ(result.gt_best_anchor[0], pick);
}

TEST(AssignAnchors, EmptyGtAllNegative) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {128, 128});
  const auto result = assign_anchors(set, {});
  EXPECT_EQ(result.count(AnchorLabel::kNegative), set.size());
}

TEST(AssignAnchors, TinyBoxesNeverPositiveOnBaseline) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {256, 256});
  Rng rng(4);
  std::vector<BoundingBox> gt;
  for (int i = 0; i < 40; ++i) gt.push_back({rng.uniform(-4, 252), rng.uniform(-4, 252), 8, 8});
  const auto result = assign_anchors(set, gt);
  EXPECT_EQ(result.count(AnchorLabel::kPositive), 0u);
  const Scan scan = exhaustive_scan(set, gt, 0.5, 0.4);
  for (std::size_t g = 0; g < gt.size(); ++g) {
    EXPECT_LE(result.gt_best_iou[g], 64.0 / 1024.0);
    EXPECT_NEAR(result.gt_best_iou[g], scan.gt_best[g], 1e-15);
  }
}

TEST(AssignAnchorsProperty, MatchesExhaustiveScan) {
  Rng rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const AnchorConfig config = trial % 2 ? AnchorConfig::dense() : AnchorConfig::baseline();
    const ImageSize image{rng.integer(40, 200), rng.integer(40, 200)};
    const AnchorSet set = generate_anchors(config, image);
    std::vector<BoundingBox> gt;
    const int n = rng.integer(0, 8);
    for (int i = 0; i < n; ++i) {
      const double w = std::exp(rng.uniform(std::log(3.0), std::log(400.0)));
      const double h = w * std::exp(rng.uniform(-1.0, 1.0));
      gt.push_back(BoundingBox::from_center(rng.uniform(-20, image.width + 20),
                                            rng.uniform(-20, image.height + 20), w, h));
    }
    if (trial == 3 && !gt.empty()) gt.push_back(gt.front());  // exact duplicate: tie to lower index
    const auto result = assign_anchors(set, gt);
    const Scan scan = exhaustive_scan(set, gt, 0.5, 0.4);
    for (std::size_t i = 0; i < set.size(); ++i) {
      ASSERT_EQ(result.labels[i], scan.labels[i]) << "trial " << trial << " anchor " << i;
      ASSERT_EQ(result.best_gt[i], scan.best_gt[i]) << "trial " << trial << " anchor " << i;
    }
    for (std::size_t g = 0; g < gt.size(); ++g) {
      ASSERT_NEAR(result.gt_best_iou[g], scan.gt_best[g], 1e-12);
    }
  }
}

TEST(AssignAnchors, PositiveImpliesThresholdOrForcedArgmax) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {128, 128});
  const std::vector<BoundingBox> gt = {{10, 10, 20, 20}, {60, 60, 48, 30}};
  AssignmentParams params;
  params.force_best_match = true;
  const auto result = assign_anchors(set, gt, params);
  // the 20x20 box tops out at 400/1024 but is forced onto its best anchor
  EXPECT_LT(result.gt_best_iou[0], 0.5);
  EXPECT_EQ(result.labels[result.gt_best_anchor[0]], AnchorLabel::kPositive);
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (result.labels[i] != AnchorLabel::kPositive) continue;
    const bool forced = i == result.gt_best_anchor[0] || i == result.gt_best_anchor[1];
    EXPECT_TRUE(result.max_iou[i] >= 0.5 || forced);
  }
  EXPECT_GT(result.gt_positive_count[0], 0u);
  const auto plain = assign_anchors(set, gt);
  EXPECT_EQ(plain.gt_positive_count[0], 0u);
}

TEST(AssignAnchors, RejectsInvertedThresholds) {
  const AnchorSet set = generate_anchors(AnchorConfig::baseline(), {64, 64});
  EXPECT_THROW(assign_anchors(set, {}, {0.3, 0.4, false}), ValidationError);
}

TEST(CoverageReport, Aligned32BoxesFullyCoveredByBaseline) {
  std::vector<BoundingBox> gt;
  for (int i = 0; i < 10; ++i) gt.push_back(BoundingBox::from_center((3 * i + 0.5) * 8, (2 * i + 0.5) * 8, 32, 32));
  const auto stats = coverage_report(AnchorConfig::baseline(), gt, {256, 256});
  ASSERT_EQ(stats.buckets[2].label, "32-96");
  EXPECT_EQ(stats.buckets[2].total, 10u);
  EXPECT_EQ(stats.buckets[2].coverage(), 1.0);
  EXPECT_EQ(stats.best_iou_histogram[9], 10u);
}

TEST(CoverageReport, EightPixelBoxes) {
  std::vector<BoundingBox> anywhere, centered;
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    anywhere.push_back({rng.uniform(0, 500), rng.uniform(0, 500), 8, 8});
    // distinct cells; coincident boxes would compete for one anchor
    centered.push_back(BoundingBox::from_center((i % 10 * 6 + 0.5) * 8, (i / 10 * 6 + 0.5) * 8, 8, 8));
  }
  const auto base = coverage_report(AnchorConfig::baseline(), anywhere, {512, 512});
  EXPECT_EQ(base.coverage(), 0.0);
  EXPECT_EQ(base.buckets[0].coverage(), 0.0);
  const auto dense = coverage_report(AnchorConfig::dense(), centered, {512, 512});
  EXPECT_EQ(dense.coverage(), 1.0);
  for (const double v : dense.gt_best_iou) EXPECT_EQ(v, 1.0);
}

TEST(CoverageReport, EmptyBucketsReportNoValue) {
  const auto stats = coverage_report(AnchorConfig::baseline(), {}, {64, 64});
  EXPECT_FALSE(stats.coverage().has_value());
  for (const auto& b : stats.buckets) EXPECT_FALSE(b.coverage().has_value());
}

TEST(CoverageProperty, DenseAtLeastBaselineOnSparseDroneScaleSets) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<BoundingBox> gt;
    for (int i = 0; i < 60; ++i) {
      const double side = rng.uniform(4, 96);
      const double r = std::exp(rng.uniform(-0.7, 0.7));
      gt.push_back(BoundingBox::from_center(rng.uniform(0, 1024), rng.uniform(0, 1024), side * std::sqrt(r),
                                            side / std::sqrt(r)));
    }
    const auto base = coverage_report(AnchorConfig::baseline(), gt, {1024, 1024});
    const auto dense = coverage_report(AnchorConfig::dense(), gt, {1024, 1024});
    EXPECT_GE(*dense.coverage(), *base.coverage()) << "trial " << trial;
  }
}

TEST(CoverageProperty, DenseBestIouClearsThresholdWheneverBaselineDoes) {
  // Isolated boxes, so argmax competition plays no part.
  const AnchorSet base = generate_anchors(AnchorConfig::baseline(), {1024, 1024});
  const AnchorSet dense = generate_anchors(AnchorConfig::dense(), {1024, 1024});
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const double side = std::exp(rng.uniform(std::log(4.0), std::log(900.0)));
    const double r = std::exp(rng.uniform(-1.2, 1.2));
    const std::vector<BoundingBox> gt = {BoundingBox::from_center(
        rng.uniform(0, 1024), rng.uniform(0, 1024), side * std::sqrt(r), side / std::sqrt(r))};
    const double b = assign_anchors(base, gt).gt_best_iou[0];
    const double d = assign_anchors(dense, gt).gt_best_iou[0];
    if (b >= 0.5) ASSERT_GE(d, 0.5) << "box " << i;
  }
}

TEST(ScaleRange, MatchesDeclaredExtremes) {
  auto sides = [](const AnchorConfig& c) {
    double lo = 1e300, hi = 0;
    for (std::size_t l = 0; l < c.base_sizes.size(); ++l) {
      for (const double s : c.scales) {
        lo = std::min(lo, c.base_sizes[l] * s);
        hi = std::max(hi, c.base_sizes[l] * s);
      }
    }
    return std::pair{lo, hi};
  };
  const auto [blo, bhi] = sides(AnchorConfig::baseline());
  EXPECT_EQ(blo, 32.0);
  EXPECT_NEAR(bhi, 512 * std::cbrt(4.0), 1e-9);
  EXPECT_NEAR(bhi, 812.75, 0.01);
  const auto [dlo, dhi] = sides(AnchorConfig::dense());
  EXPECT_DOUBLE_EQ(dlo, 3.2);
  EXPECT_DOUBLE_EQ(dhi, 1126.4);
}

}  // namespace
}  // namespace aerotrack::anchors
