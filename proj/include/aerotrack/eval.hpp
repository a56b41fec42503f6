// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "aerotrack/detection.hpp"
#include "aerotrack/geometry.hpp"
#include "aerotrack/tracker.hpp"

namespace aerotrack::eval {

/// How a prediction is compared against an ignored region.
enum class IgnoreOverlap {
  kIoU,
  /// Fraction of the prediction's area inside the region.
  kIntersectionOverPrediction,
};

struct EvalConfig {
  std::vector<double> iou_thresholds;
  /// AR cut-offs in detections per image; the largest also caps AP.
  std::vector<std::size_t> max_dets_levels{1, 10, 100, 500};
  /// Classes that are scored.
  std::vector<int> categories;
  /// Prediction classes accepted at all; anything else is an error. Known but
  /// unscored classes are dropped.
  std::vector<int> known_classes{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double ignore_threshold = 0.5;
  IgnoreOverlap ignore_overlap = IgnoreOverlap::kIoU;

  /// Thresholds 0.50:0.05:0.95 over the ten VisDrone object classes.
  static EvalConfig detection();
  /// Thresholds {0.25, 0.50, 0.75} over car, bus, truck, pedestrian and van.
  static EvalConfig tracking();

  void validate() const;
};

struct GroundTruthBox {
  FrameId image_id = 0;
  BoundingBox box;
  int class_id = 0;
};

struct IgnoreRegion {
  FrameId image_id = 0;
  BoundingBox box;
};

struct DetectionGroundTruth {
  std::vector<GroundTruthBox> boxes;
  std::vector<IgnoreRegion> ignore_regions;
};

/// All values in [0, 1]. Means skip classes without ground truth.
struct MetricsReport {
  std::vector<double> iou_thresholds;
  /// Mean over thresholds and classes.
  double ap = 0.0;
  /// Per threshold, mean over classes.
  std::vector<double> ap_per_threshold;
  /// Per class, mean over thresholds; nullopt when the class has no gt.
  std::map<int, std::optional<double>> per_class_ap;
  /// AR at each max-detections level, mean over thresholds and classes.
  /// Empty for tracking reports.
  std::map<std::size_t, double> ar;

  std::optional<double> ap_at(double threshold) const;
};

/// COCO-style detection AP/AR. Within an image and class, predictions are
/// taken by descending score and each claims the unmatched gt of highest
/// IoU >= t (lowest gt index on ties). AP is the 101-point interpolated
/// precision; AR@k keeps only the top-k predictions of each image.
MetricsReport eval_detection(std::span<const Detection> predictions,
                             const DetectionGroundTruth& ground_truth,
                             const EvalConfig& config = EvalConfig::detection());

struct TrackingSequence {
  std::vector<tracking::TrackletRow> predictions;
  std::vector<tracking::TrackletRow> ground_truth;
};

/// Mean per-frame IoU over the union of both tracklets' frame spans; frames
/// where either side has no box contribute 0. Rows must be sorted by frame.
double tracklet_iou(std::span<const tracking::TrackletRow> a,
                    std::span<const tracking::TrackletRow> b);

/// Tracklet-level AP. Predicted tracklets, by descending mean confidence,
/// claim the unmatched gt tracklet of the same class and sequence with the
/// highest tracklet_iou >= t.
MetricsReport eval_tracking(std::span<const TrackingSequence> sequences,
                            const EvalConfig& config = EvalConfig::tracking());

MetricsReport eval_tracking(std::span<const tracking::TrackletRow> predictions,
                            std::span<const tracking::TrackletRow> ground_truth,
                            const EvalConfig& config = EvalConfig::tracking());

/// 101-point interpolated AP of a ranked list of hit flags against `positives`
/// ground-truth objects.
double interpolated_ap(std::span<const char> ranked_hits, std::size_t positives);

}  // namespace aerotrack::eval
