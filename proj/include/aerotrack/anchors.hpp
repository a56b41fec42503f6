// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aerotrack/geometry.hpp"

namespace aerotrack::anchors {

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Anchor pyramid parameterization. Aspect ratios are width / height.
///
/// An anchor with base size b, scale s and ratio r has width b*s*sqrt(r)
/// and height b*s/sqrt(r), so its area is (b*s)^2 for every ratio.
struct AnchorConfig {
  std::vector<int> levels;
  std::vector<double> strides;
  std::vector<double> base_sizes;
  std::vector<double> aspect_ratios;
  std::vector<double> scales;

  std::size_t anchors_per_location() const {
    return aspect_ratios.size() * scales.size();
  }

  /// Throws ValidationError when the invariants do not hold.
  void validate() const;

  /// P3-P7, scales {2^0, 2^(1/3), 2^(2/3)}: nine anchors per location.
  static AnchorConfig baseline();
  /// Same pyramid with scales {0.1, 0.25, 0.5, 1, 2^(1/3), 2.2}.
  static AnchorConfig dense();
};

struct Anchor {
  BoundingBox box;
  int level = 0;
  int grid_x = 0;
  int grid_y = 0;
  int ratio_index = 0;
  int scale_index = 0;
};

struct LevelAnchors {
  int level = 0;
  double stride = 0.0;
  int grid_width = 0;
  int grid_height = 0;
  std::size_t anchors_per_location = 0;
  /// Row-major over (grid_y, grid_x), then ratio, then scale.
  std::vector<Anchor> anchors;
  /// Largest half-width / half-height of any anchor on this level.
  double max_half_width = 0.0;
  double max_half_height = 0.0;

  std::size_t index_of(int gx, int gy, std::size_t k) const {
    return (static_cast<std::size_t>(gy) * grid_width + gx) *
               anchors_per_location +
           k;
  }
};

struct AnchorSet {
  std::vector<LevelAnchors> levels;

  std::size_t size() const;
  /// Offset of each level in the flat anchor index, plus the total at the end.
  std::vector<std::size_t> level_offsets() const;
  const Anchor& at(std::size_t flat_index) const;
};

/// Tiles anchors over every level; cell (i, j) is centered at
/// ((i + 0.5) * stride, (j + 0.5) * stride) and grids have
/// ceil(dim / stride) cells per axis. Anchors are not clipped.
AnchorSet generate_anchors(const AnchorConfig& config, ImageSize image_size);

enum class AnchorLabel { kNegative, kIgnore, kPositive };

struct AssignmentParams {
  double pos_iou = 0.5;
  double neg_iou = 0.4;
  /// When set, every gt with a nonzero best IoU promotes its best anchor to
  /// positive even below pos_iou.
  bool force_best_match = false;
};

/// Per-anchor labels over the flat anchor index of an AnchorSet.
struct AnchorAssignment {
  std::vector<AnchorLabel> labels;
  /// Argmax gt of each anchor (lowest index on ties); -1 when no gt overlaps.
  std::vector<int> best_gt;
  std::vector<double> max_iou;
  /// Best IoU any anchor reaches for each gt, and the (lowest) anchor index
  /// attaining it.
  std::vector<double> gt_best_iou;
  std::vector<std::size_t> gt_best_anchor;
  /// Number of positive anchors whose argmax is each gt.
  std::vector<std::size_t> gt_positive_count;

  std::size_t count(AnchorLabel label) const;
};

AnchorAssignment assign_anchors(const AnchorSet& anchors,
                                std::span<const BoundingBox> gt,
                                const AssignmentParams& params = {});

struct SizeBucket {
  std::string label;
  double min_side = 0.0;  // inclusive
  double max_side = 0.0;  // exclusive
  std::size_t total = 0;
  std::size_t covered = 0;

  std::optional<double> coverage() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(covered) / static_cast<double>(total);
  }
};

struct CoverageStats {
  /// Buckets on sqrt(area): <16, 16-32, 32-96, >=96 pixels.
  std::vector<SizeBucket> buckets;
  std::vector<double> gt_best_iou;
  /// Ten equal-width bins over [0, 1]; IoU 1.0 lands in the last bin.
  std::vector<std::size_t> best_iou_histogram;
  std::size_t total = 0;
  std::size_t covered = 0;
  std::size_t anchor_count = 0;

  std::optional<double> coverage() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(covered) / static_cast<double>(total);
  }
};

/// A gt counts as covered when at least one positive anchor is matched to it.
CoverageStats coverage_report(const AnchorConfig& config,
                              std::span<const BoundingBox> gt,
                              ImageSize image_size, double pos_iou = 0.5,
                              bool force_best_match = false);

std::vector<SizeBucket> default_size_buckets();

}  // namespace aerotrack::anchors
