// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "aerotrack/error.hpp"

namespace aerotrack::postprocess {

BoundingBox decode_deltas(const BoundingBox& anchor, const BoxDeltas& deltas) {
  if (!anchor.valid()) throw ValidationError("decode_deltas: invalid anchor");
  if (!std::isfinite(deltas.dx) || !std::isfinite(deltas.dy) ||
      !std::isfinite(deltas.dw) || !std::isfinite(deltas.dh)) {
    throw ValidationError("decode_deltas: non-finite deltas");
  }
  const double w = anchor.width * std::exp(deltas.dw);
  const double h = anchor.height * std::exp(deltas.dh);
  // left' = center + dx*w_a - w'/2, arranged so zero deltas add exactly 0.
  const double left = anchor.left + (deltas.dx * anchor.width + 0.5 * (anchor.width - w));
  const double top = anchor.top + (deltas.dy * anchor.height + 0.5 * (anchor.height - h));
  const BoundingBox out{left, top, w, h};
  if (!out.valid()) throw ValidationError("decode_deltas: decoded box overflows");
  return out;
}

namespace {

struct Candidate {
  const Detection* det;
  std::size_t order;  // position in the concatenated input
};

bool by_score(const Candidate& a, const Candidate& b) {
  if (a.det->confidence != b.det->confidence) {
    return a.det->confidence > b.det->confidence;
  }
  return a.order < b.order;
}

}  // namespace

std::vector<Detection> nms_pipeline(std::span<const std::vector<Detection>> levels,
                                    const NmsParams& params) {
  if (!(params.nms_iou >= 0.0 && params.nms_iou <= 1.0) || !std::isfinite(params.score_thresh)) {
    throw ValidationError("nms: nms_iou must be in [0, 1] and score_thresh finite");
  }
  std::vector<Candidate> merged;
  std::size_t order = 0;
  for (const auto& level : levels) {
    std::vector<Candidate> kept;
    for (const auto& det : level) {
      if (det.confidence >= params.score_thresh) kept.push_back({&det, order});
      ++order;
    }
    std::sort(kept.begin(), kept.end(), by_score);
    if (kept.size() > params.topk_per_level) kept.resize(params.topk_per_level);
    merged.insert(merged.end(), kept.begin(), kept.end());
  }
  std::sort(merged.begin(), merged.end(), by_score);

  std::map<int, std::vector<const Candidate*>> kept_by_class;
  std::vector<Candidate> survivors;
  for (const auto& cand : merged) {
    auto& kept = kept_by_class[cand.det->class_id];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Candidate* k) {
      return iou(k->det->box, cand.det->box) > params.nms_iou;
    });
    if (suppressed) continue;
    kept.push_back(&cand);
    survivors.push_back(cand);
  }
  // survivors inherit the merged order, so they are already score-sorted.
  if (survivors.size() > params.max_dets) survivors.resize(params.max_dets);

  std::vector<Detection> out;
  out.reserve(survivors.size());
  for (const auto& s : survivors) out.push_back(*s.det);
  return out;
}

std::vector<Detection> nms_pipeline(std::span<const Detection> detections,
                                    const NmsParams& params) {
  const std::vector<Detection> level(detections.begin(), detections.end());
  return nms_pipeline(std::span<const std::vector<Detection>>(&level, 1), params);
}

}  // namespace aerotrack::postprocess
