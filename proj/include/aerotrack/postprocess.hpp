// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aerotrack/detection.hpp"
#include "aerotrack/geometry.hpp"

namespace aerotrack::postprocess {

/// Raw regression output: center offsets in units of anchor size and log
/// size ratios. No variance scaling is applied.
struct BoxDeltas {
  double dx = 0.0;
  double dy = 0.0;
  double dw = 0.0;
  double dh = 0.0;
};

/// Throws ValidationError on non-finite deltas or an invalid anchor. Zero
/// deltas reproduce the anchor bit for bit.
BoundingBox decode_deltas(const BoundingBox& anchor, const BoxDeltas& deltas);

struct NmsParams {
  double score_thresh = 0.05;
  std::size_t topk_per_level = 1000;
  double nms_iou = 0.5;
  std::size_t max_dets = 500;
};

/// Score threshold and top-k per level, merge, class-wise greedy NMS, then the
/// global max_dets cut. A box is suppressed when its IoU with a kept box of
/// the same class is strictly greater than nms_iou. Output is sorted by
/// descending score; ties keep input order (levels concatenated in order).
std::vector<Detection> nms_pipeline(
    std::span<const std::vector<Detection>> levels, const NmsParams& params = {});

/// Single-level convenience overload.
std::vector<Detection> nms_pipeline(std::span<const Detection> detections,
                                    const NmsParams& params = {});

}  // namespace aerotrack::postprocess
