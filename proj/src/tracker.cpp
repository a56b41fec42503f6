// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/tracker.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "aerotrack/error.hpp"

namespace aerotrack::tracking {

void TrackerParams::validate() const {
  if (n_init < 1) throw ValidationError("n_init must be >= 1");
  if (max_age < 1) throw ValidationError("max_age must be >= 1");
  if (gallery_budget < 1) throw ValidationError("gallery_budget must be >= 1");
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) {
    throw ValidationError("confidence_floor must lie in [0, 1]");
  }
  association.validate();
  motion.validate();
}

Tracker::Tracker(TrackerParams params)
    : params_((params.validate(), params)), gallery_(params_.gallery_budget) {}

void Tracker::spawn(const Detection& det, std::span<const float> embedding) {
  Track track;
  track.track_id = next_id_++;
  track.class_id = det.class_id;
  track.hits = 1;
  track.status = track.hits >= params_.n_init ? TrackStatus::kConfirmed : TrackStatus::kTentative;
  track.motion = motion::initiate(to_xyah(det.box), params_.motion);
  track.last_confidence = det.confidence;
  gallery_.insert(track.track_id, embedding);
  tracks_.push_back(std::move(track));
}

std::vector<TrackletRow> Tracker::step(FrameId frame, std::span<const Detection> detections,
                                       const EmbeddingTable& embeddings) {
  if (last_frame_ && frame <= *last_frame_) {
    throw ValidationError("frame " + std::to_string(frame) + " does not follow frame " +
                          std::to_string(*last_frame_));
  }
  std::vector<Detection> dets;
  std::vector<std::span<const float>> det_embeddings;
  for (const auto& det : detections) {
    if (det.frame_id != frame) {
      throw ValidationError("frame " + std::to_string(frame) +
                            ": detection belongs to frame " + std::to_string(det.frame_id));
    }
    if (!det.embedding_ref || *det.embedding_ref >= embeddings.size()) {
      throw ValidationError("frame " + std::to_string(frame) +
                            ": detection has no embedding row");
    }
    if (det.confidence < params_.confidence_floor) continue;
    dets.push_back(det);
    det_embeddings.push_back(embeddings.row(*det.embedding_ref));
  }
  last_frame_ = frame;

  for (auto& track : tracks_) {
    track.motion = motion::predict(track.motion, params_.motion);
    ++track.time_since_update;
  }

  std::vector<association::TrackCandidate> track_candidates;
  track_candidates.reserve(tracks_.size());
  for (const auto& track : tracks_) {
    track_candidates.push_back(
        {track.track_id, track.time_since_update, track.motion, track.box()});
  }
  std::vector<association::DetectionCandidate> det_candidates;
  det_candidates.reserve(dets.size());
  for (std::size_t d = 0; d < dets.size(); ++d) {
    det_candidates.push_back({dets[d].box, dets[d].confidence, det_embeddings[d]});
  }

  std::set<int> classes;
  for (const auto& track : tracks_) classes.insert(track.class_id);
  for (const auto& det : dets) classes.insert(det.class_id);

  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_dets;
  for (const int cls : classes) {
    std::vector<std::size_t> confirmed, tentative, class_dets;
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      if (tracks_[t].class_id != cls) continue;
      (tracks_[t].status == TrackStatus::kConfirmed ? confirmed : tentative).push_back(t);
    }
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (dets[d].class_id == cls) class_dets.push_back(d);
    }

    const auto cascade = association::matching_cascade(
        track_candidates, confirmed, det_candidates, class_dets, gallery_,
        params_.association, params_.motion, params_.max_age);

    // Tentative tracks and confirmed tracks missed only in this frame get a
    // second chance on box overlap with the predicted position.
    std::vector<std::size_t> iou_tracks = tentative;
    for (const std::size_t t : cascade.unmatched_tracks) {
      if (tracks_[t].time_since_update == 1) {
        iou_tracks.push_back(t);
      } else {
        unmatched_tracks.push_back(t);
      }
    }
    std::sort(iou_tracks.begin(), iou_tracks.end());
    const auto overlap = association::iou_match(track_candidates, iou_tracks, det_candidates,
                                                cascade.unmatched_detections,
                                                params_.association.max_iou_distance);

    matches.insert(matches.end(), cascade.matches.begin(), cascade.matches.end());
    matches.insert(matches.end(), overlap.matches.begin(), overlap.matches.end());
    unmatched_tracks.insert(unmatched_tracks.end(), overlap.unmatched_tracks.begin(),
                            overlap.unmatched_tracks.end());
    unmatched_dets.insert(unmatched_dets.end(), overlap.unmatched_detections.begin(),
                          overlap.unmatched_detections.end());
  }

  for (const auto& [t, d] : matches) {
    Track& track = tracks_[t];
    track.motion = motion::update(track.motion, to_xyah(dets[d].box), params_.motion);
    gallery_.insert(track.track_id, det_embeddings[d]);
    ++track.hits;
    track.time_since_update = 0;
    track.last_confidence = dets[d].confidence;
    if (track.status == TrackStatus::kTentative && track.hits >= params_.n_init) {
      track.status = TrackStatus::kConfirmed;
    }
  }
  for (const std::size_t t : unmatched_tracks) {
    Track& track = tracks_[t];
    if (track.status == TrackStatus::kTentative || track.time_since_update > params_.max_age) {
      track.status = TrackStatus::kDeleted;
    }
  }
  std::sort(unmatched_dets.begin(), unmatched_dets.end());
  for (const std::size_t d : unmatched_dets) spawn(dets[d], det_embeddings[d]);

  std::erase_if(tracks_, [this](const Track& track) {
    if (track.status != TrackStatus::kDeleted) return false;
    gallery_.erase(track.track_id);
    return true;
  });

  std::vector<TrackletRow> emitted;
  for (const auto& track : tracks_) {
    if (track.status != TrackStatus::kConfirmed || track.time_since_update != 0) continue;
    emitted.push_back({frame, track.track_id, track.box(), track.class_id, track.last_confidence});
  }
  std::sort(emitted.begin(), emitted.end(),
            [](const TrackletRow& a, const TrackletRow& b) { return a.track_id < b.track_id; });
  return emitted;
}

TrackletOutput run_sequence(const DetectionStream& stream, const EmbeddingTable& embeddings,
                            const TrackerParams& params) {
  for (const auto& frame : stream) {
    for (const auto& det : frame.detections) {
      if (!det.embedding_ref || *det.embedding_ref >= embeddings.size()) {
        throw ValidationError("frame " + std::to_string(frame.frame_id) + ": " +
                              std::to_string(frame.detections.size()) +
                              " detections but embeddings are missing (table has " +
                              std::to_string(embeddings.size()) + " rows)");
      }
    }
  }

  Tracker tracker(params);
  TrackletOutput out;
  std::optional<FrameId> previous;
  for (const auto& frame : stream) {
    if (previous) {
      if (frame.frame_id <= *previous) {
        throw ValidationError("frame " + std::to_string(frame.frame_id) +
                              " is out of order in the detection stream");
      }
      for (FrameId gap = *previous + 1; gap < frame.frame_id; ++gap) {
        tracker.step(gap, {}, embeddings);
      }
    }
    const auto rows = tracker.step(frame.frame_id, frame.detections, embeddings);
    out.insert(out.end(), rows.begin(), rows.end());
    previous = frame.frame_id;
  }
  return out;
}

}  // namespace aerotrack::tracking
