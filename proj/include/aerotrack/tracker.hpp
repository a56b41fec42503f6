// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aerotrack/association.hpp"
#include "aerotrack/detection.hpp"
#include "aerotrack/embedding_table.hpp"
#include "aerotrack/motion.hpp"

namespace aerotrack::tracking {

using association::TrackId;

enum class TrackStatus { kTentative, kConfirmed, kDeleted };

struct TrackerParams {
  int n_init = 3;
  int max_age = 30;
  std::size_t gallery_budget = 100;
  /// Detections below this confidence never reach association. 0 disables it.
  double confidence_floor = 0.0;
  association::AssociationParams association;
  motion::MotionParams motion;

  void validate() const;
};

struct Track {
  TrackId track_id = 0;
  int class_id = 0;
  TrackStatus status = TrackStatus::kTentative;
  int hits = 0;
  int time_since_update = 0;
  motion::KalmanState motion;
  double last_confidence = 0.0;

  BoundingBox box() const { return motion::mean_box(motion); }
};

/// One emitted observation: `frame,track_id,x,y,w,h,confidence,class,-1,-1`.
struct TrackletRow {
  FrameId frame = 0;
  TrackId track_id = 0;
  BoundingBox box;
  int class_id = 0;
  double confidence = 0.0;

  friend bool operator==(const TrackletRow&, const TrackletRow&) = default;
};

using TrackletOutput = std::vector<TrackletRow>;

/// Stateful per-sequence tracker. Association happens strictly within a
/// class; track ids come from one counter shared by all classes.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {});

  /// Advances one frame. Frames must strictly increase; every detection must
  /// carry `frame` and an embedding_ref that resolves in `embeddings`.
  /// Returns confirmed tracks updated in this frame, sorted by track id.
  std::vector<TrackletRow> step(FrameId frame, std::span<const Detection> detections,
                                const EmbeddingTable& embeddings);

  const std::vector<Track>& tracks() const { return tracks_; }
  const association::AppearanceGallery& gallery() const { return gallery_; }
  const TrackerParams& params() const { return params_; }

 private:
  void spawn(const Detection& det, std::span<const float> embedding);

  TrackerParams params_;
  association::AppearanceGallery gallery_;
  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
  std::optional<FrameId> last_frame_;
};

/// Runs a whole sequence. Frame ids missing between the first and last frame
/// of the stream are stepped with no detections so tracks keep aging.
TrackletOutput run_sequence(const DetectionStream& stream, const EmbeddingTable& embeddings,
                            const TrackerParams& params = {});

}  // namespace aerotrack::tracking
