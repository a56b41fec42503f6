// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "aerotrack/error.hpp"

namespace aerotrack::anchors {

namespace {

template <typename T>
bool strictly_ascending(const std::vector<T>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<T>()) ==
         v.end();
}

bool all_positive_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x) && x > 0.0; });
}

// Inclusive cell index range whose anchors may intersect [lo, hi] on one axis.
std::pair<int, int> candidate_cells(double lo, double hi, double half_extent,
                                    double stride, int cells) {
  const double first = std::clamp((lo - half_extent) / stride - 0.5, -2.0, cells + 1.0);
  const double last = std::clamp((hi + half_extent) / stride - 0.5, -2.0, cells + 1.0);
  int a = static_cast<int>(std::floor(first)) - 1;
  int b = static_cast<int>(std::ceil(last)) + 1;
  a = std::max(a, 0);
  b = std::min(b, cells - 1);
  return {a, b};
}

}  // namespace

void AnchorConfig::validate() const {
  if (aspect_ratios.empty()) throw ValidationError("anchor config: no aspect ratios");
  if (scales.empty()) throw ValidationError("anchor config: no scales");
  if (levels.empty()) throw ValidationError("anchor config: no pyramid levels");
  if (strides.size() != levels.size() || base_sizes.size() != levels.size()) {
    throw ValidationError(
        "anchor config: levels, strides and base_sizes must have equal length");
  }
  if (!strictly_ascending(levels) || !strictly_ascending(strides) ||
      !strictly_ascending(base_sizes)) {
    throw ValidationError(
        "anchor config: levels, strides and base_sizes must ascend");
  }
  if (!all_positive_finite(strides) || !all_positive_finite(base_sizes)) {
    throw ValidationError("anchor config: strides and base sizes must be > 0");
  }
  if (!all_positive_finite(scales)) throw ValidationError("anchor config: scales must be > 0");
  if (!all_positive_finite(aspect_ratios)) {
    throw ValidationError("anchor config: aspect ratios must be > 0");
  }
}

AnchorConfig AnchorConfig::baseline() {
  return {{3, 4, 5, 6, 7},
          {8, 16, 32, 64, 128},
          {32, 64, 128, 256, 512},
          {0.5, 1.0, 2.0},
          {1.0, std::pow(2.0, 1.0 / 3.0), std::pow(2.0, 2.0 / 3.0)}};
}

AnchorConfig AnchorConfig::dense() {
  AnchorConfig config = baseline();
  config.scales = {0.1, 0.25, 0.5, 1.0, std::pow(2.0, 1.0 / 3.0), 2.2};
  return config;
}

std::size_t AnchorSet::size() const {
  std::size_t n = 0;
  for (const auto& level : levels) n += level.anchors.size();
  return n;
}

std::vector<std::size_t> AnchorSet::level_offsets() const {
  std::vector<std::size_t> offsets{0};
  for (const auto& level : levels) {
    offsets.push_back(offsets.back() + level.anchors.size());
  }
  return offsets;
}

const Anchor& AnchorSet::at(std::size_t flat_index) const {
  for (const auto& level : levels) {
    if (flat_index < level.anchors.size()) return level.anchors[flat_index];
    flat_index -= level.anchors.size();
  }
  throw std::out_of_range("anchor index out of range");
}

AnchorSet generate_anchors(const AnchorConfig& config, ImageSize image_size) {
  config.validate();
  if (image_size.width <= 0 || image_size.height <= 0) {
    throw ValidationError("image size must be positive");
  }

  // Shapes are shared by every cell of a level.
  struct Shape {
    double w, h;
    int ratio, scale;
  };

  AnchorSet set;
  set.levels.reserve(config.levels.size());
  for (std::size_t l = 0; l < config.levels.size(); ++l) {
    LevelAnchors level;
    level.level = config.levels[l];
    level.stride = config.strides[l];
    level.grid_width = static_cast<int>(std::ceil(image_size.width / level.stride));
    level.grid_height = static_cast<int>(std::ceil(image_size.height / level.stride));
    level.anchors_per_location = config.anchors_per_location();

    std::vector<Shape> shapes;
    for (std::size_t r = 0; r < config.aspect_ratios.size(); ++r) {
      // Both factors come from a correctly rounded sqrt, so their product
      // never rounds below 1 and the anchor area never below side^2.
      const double wide = std::sqrt(config.aspect_ratios[r]);
      const double tall = std::sqrt(1.0 / config.aspect_ratios[r]);
      for (std::size_t s = 0; s < config.scales.size(); ++s) {
        const double side = config.base_sizes[l] * config.scales[s];
        shapes.push_back({side * wide, side * tall, static_cast<int>(r),
                          static_cast<int>(s)});
        level.max_half_width = std::max(level.max_half_width, 0.5 * side * wide);
        level.max_half_height = std::max(level.max_half_height, 0.5 * side * tall);
      }
    }

    level.anchors.reserve(static_cast<std::size_t>(level.grid_width) *
                          level.grid_height * shapes.size());
    for (int gy = 0; gy < level.grid_height; ++gy) {
      const double cy = (gy + 0.5) * level.stride;
      for (int gx = 0; gx < level.grid_width; ++gx) {
        const double cx = (gx + 0.5) * level.stride;
        for (const auto& shape : shapes) {
          level.anchors.push_back(
              {BoundingBox::from_center(cx, cy, shape.w, shape.h), level.level,
               gx, gy, shape.ratio, shape.scale});
        }
      }
    }
    set.levels.push_back(std::move(level));
  }
  return set;
}

std::size_t AnchorAssignment::count(AnchorLabel label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

AnchorAssignment assign_anchors(const AnchorSet& anchors,
                                std::span<const BoundingBox> gt,
                                const AssignmentParams& params) {
  if (!(params.pos_iou >= params.neg_iou) || params.neg_iou < 0.0 ||
      params.pos_iou > 1.0) {
    throw ValidationError("anchor assignment requires 0 <= neg_iou <= pos_iou <= 1");
  }
  for (const auto& box : gt) {
    if (!box.valid()) throw ValidationError("anchor assignment: invalid gt box");
  }

  const std::size_t n = anchors.size();
  AnchorAssignment out;
  out.labels.assign(n, AnchorLabel::kNegative);
  out.best_gt.assign(n, -1);
  out.max_iou.assign(n, 0.0);
  out.gt_best_iou.assign(gt.size(), 0.0);
  out.gt_best_anchor.assign(gt.size(), 0);
  out.gt_positive_count.assign(gt.size(), 0);

  const auto offsets = anchors.level_offsets();

  // Only anchors near a gt can overlap it; everything else keeps IoU 0.
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const BoundingBox& box = gt[g];
    bool found = false;
    for (std::size_t l = 0; l < anchors.levels.size(); ++l) {
      const LevelAnchors& level = anchors.levels[l];
      const auto [x0, x1] = candidate_cells(box.left, box.right(), level.max_half_width,
                                            level.stride, level.grid_width);
      const auto [y0, y1] = candidate_cells(box.top, box.bottom(), level.max_half_height,
                                            level.stride, level.grid_height);
      for (int gy = y0; gy <= y1; ++gy) {
        for (int gx = x0; gx <= x1; ++gx) {
          for (std::size_t k = 0; k < level.anchors_per_location; ++k) {
            const std::size_t local = level.index_of(gx, gy, k);
            const std::size_t flat = offsets[l] + local;
            const double overlap = iou(level.anchors[local].box, box);
            if (overlap > out.max_iou[flat]) {
              out.max_iou[flat] = overlap;
              out.best_gt[flat] = static_cast<int>(g);
            }
            if (!found || overlap > out.gt_best_iou[g]) {
              out.gt_best_iou[g] = overlap;
              out.gt_best_anchor[g] = flat;
              found = true;
            }
          }
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (out.best_gt[i] < 0) continue;
    if (out.max_iou[i] >= params.pos_iou) {
      out.labels[i] = AnchorLabel::kPositive;
    } else if (out.max_iou[i] >= params.neg_iou) {
      out.labels[i] = AnchorLabel::kIgnore;
    }
  }
  if (params.force_best_match) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (out.gt_best_iou[g] > 0.0) {
        out.labels[out.gt_best_anchor[g]] = AnchorLabel::kPositive;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] == AnchorLabel::kPositive) {
      ++out.gt_positive_count[static_cast<std::size_t>(out.best_gt[i])];
    }
  }
  return out;
}

std::vector<SizeBucket> default_size_buckets() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{"<16", 0.0, 16.0, 0, 0},
          {"16-32", 16.0, 32.0, 0, 0},
          {"32-96", 32.0, 96.0, 0, 0},
          {">=96", 96.0, inf, 0, 0}};
}

CoverageStats coverage_report(const AnchorConfig& config,
                              std::span<const BoundingBox> gt,
                              ImageSize image_size, double pos_iou,
                              bool force_best_match) {
  const AnchorSet set = generate_anchors(config, image_size);
  AssignmentParams params;
  params.pos_iou = pos_iou;
  params.neg_iou = std::min(params.neg_iou, pos_iou);
  params.force_best_match = force_best_match;
  const AnchorAssignment assignment = assign_anchors(set, gt, params);

  CoverageStats stats;
  stats.buckets = default_size_buckets();
  stats.best_iou_histogram.assign(10, 0);
  stats.gt_best_iou = assignment.gt_best_iou;
  stats.total = gt.size();
  stats.anchor_count = set.size();
  for (std::size_t g = 0; g < gt.size(); ++g) {
    const bool covered = assignment.gt_positive_count[g] > 0;
    stats.covered += covered ? 1 : 0;
    const double side = std::sqrt(gt[g].area());
    for (auto& bucket : stats.buckets) {
      if (side >= bucket.min_side && side < bucket.max_side) {
        ++bucket.total;
        bucket.covered += covered ? 1 : 0;
        break;
      }
    }
    const auto bin = std::min<std::size_t>(
        9, static_cast<std::size_t>(assignment.gt_best_iou[g] * 10.0));
    ++stats.best_iou_histogram[bin];
  }
  return stats;
}

}  // namespace aerotrack::anchors
