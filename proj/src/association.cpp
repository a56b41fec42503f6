// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/association.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aerotrack/error.hpp"

namespace aerotrack::association {

namespace {

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (const float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

void check_embedding(std::span<const float> v, std::optional<std::size_t> dim) {
  if (v.empty()) throw ValidationError("embedding is empty");
  if (dim && v.size() != *dim) {
    throw ValidationError("embedding has dimension " + std::to_string(v.size()) +
                          ", expected " + std::to_string(*dim));
  }
  for (const float x : v) {
    if (!std::isfinite(x)) throw ValidationError("embedding has a non-finite component");
  }
}

}  // namespace

AppearanceGallery::AppearanceGallery(std::size_t budget) : budget_(budget) {
  if (budget_ == 0) throw ValidationError("gallery budget must be >= 1");
}

void AppearanceGallery::insert(TrackId id, std::span<const float> embedding) {
  check_embedding(embedding, dim_);
  const double norm = l2_norm(embedding);
  if (norm == 0.0) throw ValidationError("cannot store a zero embedding");
  std::vector<float> unit(embedding.size());
  for (std::size_t k = 0; k < embedding.size(); ++k) {
    unit[k] = static_cast<float>(embedding[k] / norm);
  }
  dim_ = embedding.size();
  auto& queue = samples_[id];
  queue.push_back(std::move(unit));
  while (queue.size() > budget_) queue.pop_front();
}

double AppearanceGallery::cosine_distance(TrackId id, std::span<const float> query) const {
  check_embedding(query, dim_);
  const auto it = samples_.find(id);
  if (it == samples_.end() || it->second.empty()) {
    throw ValidationError("track " + std::to_string(id) + " has no stored embeddings");
  }
  const double norm = l2_norm(query);
  if (norm == 0.0) throw ValidationError("query embedding is zero");
  double best = -1.0;
  for (const auto& sample : it->second) {
    double dot = 0.0;
    for (std::size_t k = 0; k < query.size(); ++k) {
      dot += static_cast<double>(sample[k]) * query[k];
    }
    best = std::max(best, dot / norm);
  }
  return std::clamp(1.0 - best, 0.0, 2.0);
}

void AppearanceGallery::erase(TrackId id) { samples_.erase(id); }

bool AppearanceGallery::contains(TrackId id) const { return samples_.count(id) != 0; }

std::size_t AppearanceGallery::sample_count(TrackId id) const {
  const auto it = samples_.find(id);
  return it == samples_.end() ? 0 : it->second.size();
}

const std::deque<std::vector<float>>& AppearanceGallery::samples(TrackId id) const {
  const auto it = samples_.find(id);
  if (it == samples_.end()) {
    throw ValidationError("track " + std::to_string(id) + " has no stored embeddings");
  }
  return it->second;
}

void AssociationParams::validate() const {
  if (!(lambda_app >= 0.0 && lambda_app <= 1.0)) {
    throw ValidationError("lambda_app must lie in [0, 1]");
  }
  if (!(gate_threshold > 0.0)) throw ValidationError("gate_threshold must be > 0");
  if (!(max_app_distance >= 0.0 && max_app_distance <= 2.0)) {
    throw ValidationError("max_app_distance must lie in [0, 2]");
  }
  if (!(max_iou_distance >= 0.0 && max_iou_distance <= 1.0)) {
    throw ValidationError("max_iou_distance must lie in [0, 1]");
  }
}

double fused_cost(double d_app, double gate_dist, double det_confidence,
                  const AssociationParams& params) {
  if (gate_dist > params.gate_threshold || d_app > params.max_app_distance) {
    return kInfeasible;
  }
  return params.lambda_app * d_app + (1.0 - params.lambda_app) * (1.0 - det_confidence);
}

CostMatrix fused_cost_matrix(std::span<const TrackCandidate> tracks,
                             std::span<const std::size_t> track_indices,
                             std::span<const DetectionCandidate> detections,
                             std::span<const std::size_t> detection_indices,
                             const AppearanceGallery& gallery,
                             const AssociationParams& params,
                             const motion::MotionParams& motion_params) {
  CostMatrix cost(track_indices.size(), detection_indices.size());
  std::vector<BoxXYAH> measurements;
  measurements.reserve(detection_indices.size());
  for (const std::size_t d : detection_indices) {
    measurements.push_back(to_xyah(detections[d].box));
  }
  for (std::size_t r = 0; r < track_indices.size(); ++r) {
    const TrackCandidate& track = tracks[track_indices[r]];
    const std::vector<double> gate =
        motion::gating_distance(track.state, measurements, motion_params);
    for (std::size_t c = 0; c < detection_indices.size(); ++c) {
      const DetectionCandidate& det = detections[detection_indices[c]];
      const double d_app = gallery.cosine_distance(track.id, det.embedding);
      cost.set(r, c, fused_cost(d_app, gate[c], det.confidence, params));
    }
  }
  return cost;
}

MatchResult matching_cascade(std::span<const TrackCandidate> tracks,
                             std::span<const std::size_t> track_indices,
                             std::span<const DetectionCandidate> detections,
                             std::span<const std::size_t> detection_indices,
                             const AppearanceGallery& gallery,
                             const AssociationParams& params,
                             const motion::MotionParams& motion_params, int max_age) {
  MatchResult out;
  std::vector<std::size_t> free_dets(detection_indices.begin(), detection_indices.end());
  std::vector<char> track_matched(tracks.size(), 0);

  for (int age = 1; age <= max_age && !free_dets.empty(); ++age) {
    std::vector<std::size_t> level;
    for (const std::size_t t : track_indices) {
      if (tracks[t].time_since_update == age) level.push_back(t);
    }
    if (level.empty()) continue;

    const CostMatrix cost = fused_cost_matrix(tracks, level, detections, free_dets,
                                              gallery, params, motion_params);
    const AssignmentResult solved = solve_assignment(cost);
    std::vector<char> det_taken(free_dets.size(), 0);
    for (const auto& [r, c] : solved.matches) {
      out.matches.emplace_back(level[r], free_dets[c]);
      track_matched[level[r]] = 1;
      det_taken[c] = 1;
    }
    std::vector<std::size_t> remaining;
    for (std::size_t c = 0; c < free_dets.size(); ++c) {
      if (!det_taken[c]) remaining.push_back(free_dets[c]);
    }
    free_dets = std::move(remaining);
  }

  for (const std::size_t t : track_indices) {
    if (!track_matched[t]) out.unmatched_tracks.push_back(t);
  }
  out.unmatched_detections = std::move(free_dets);
  std::sort(out.matches.begin(), out.matches.end());
  return out;
}

MatchResult iou_match(std::span<const TrackCandidate> tracks,
                      std::span<const std::size_t> track_indices,
                      std::span<const DetectionCandidate> detections,
                      std::span<const std::size_t> detection_indices,
                      double max_iou_distance) {
  CostMatrix cost(track_indices.size(), detection_indices.size());
  for (std::size_t r = 0; r < track_indices.size(); ++r) {
    const BoundingBox& predicted = tracks[track_indices[r]].predicted_box;
    for (std::size_t c = 0; c < detection_indices.size(); ++c) {
      const double overlap = iou(predicted, detections[detection_indices[c]].box);
      const double d = 1.0 - overlap;
      if (overlap > 0.0 && d <= max_iou_distance) cost.set(r, c, d);
    }
  }
  const AssignmentResult solved = solve_assignment(cost);

  MatchResult out;
  for (const auto& [r, c] : solved.matches) {
    out.matches.emplace_back(track_indices[r], detection_indices[c]);
  }
  for (const std::size_t r : solved.unmatched_rows) {
    out.unmatched_tracks.push_back(track_indices[r]);
  }
  for (const std::size_t c : solved.unmatched_cols) {
    out.unmatched_detections.push_back(detection_indices[c]);
  }
  std::sort(out.matches.begin(), out.matches.end());
  return out;
}

}  // namespace aerotrack::association
