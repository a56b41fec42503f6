// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aerotrack/geometry.hpp"
#include "aerotrack/motion.hpp"

namespace aerotrack::association {

using TrackId = std::int64_t;

/// Marks a pair that may never be matched.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// Per-track FIFO of unit-norm embeddings, at most `budget` per track.
class AppearanceGallery {
 public:
  explicit AppearanceGallery(std::size_t budget = 100);

  /// Normalizes and appends; evicts the oldest sample past the budget.
  /// Throws ValidationError for zero, non-finite or wrong-sized embeddings.
  void insert(TrackId id, std::span<const float> embedding);

  /// 1 - max_k <g_k, q/|q|> over the stored samples g_k of the track.
  /// Throws ValidationError when the track has no samples or the query is
  /// zero or wrong-sized.
  double cosine_distance(TrackId id, std::span<const float> query) const;

  void erase(TrackId id);
  bool contains(TrackId id) const;
  std::size_t sample_count(TrackId id) const;
  const std::deque<std::vector<float>>& samples(TrackId id) const;

  std::size_t budget() const { return budget_; }
  /// Embedding width, fixed by the first insert.
  std::optional<std::size_t> dim() const { return dim_; }

 private:
  std::size_t budget_;
  std::optional<std::size_t> dim_;
  std::unordered_map<TrackId, std::deque<std::vector<float>>> samples_;
};

struct AssociationParams {
  /// Weight of appearance distance; the rest goes to (1 - confidence).
  double lambda_app = 0.7;
  double gate_threshold = motion::kChi2Gate4Dof;
  double max_app_distance = 0.4;
  double max_iou_distance = 0.7;

  void validate() const;
};

/// lambda * d_app + (1 - lambda) * (1 - confidence), or kInfeasible when the
/// motion gate or the appearance gate rejects the pair.
double fused_cost(double d_app, double gate_dist, double det_confidence,
                  const AssociationParams& params);

/// Dense rows x cols matrix of nonnegative costs or kInfeasible.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kInfeasible);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  bool feasible(std::size_t r, std::size_t c) const { return at(r, c) != kInfeasible; }

  /// Throws ValidationError for negative or NaN values.
  void set(std::size_t r, std::size_t c, double value);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct AssignmentResult {
  /// (row, col) sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
  /// Sum of matched costs, accumulated in row order.
  double total_cost = 0.0;
};

/// Exact minimum-cost matching over feasible entries. Among matchings of
/// maximum cardinality it returns one of minimum total cost, and among those
/// the one whose row-sorted (row, col) sequence is lexicographically
/// smallest.
AssignmentResult solve_assignment(const CostMatrix& cost);

struct TrackCandidate {
  TrackId id = 0;
  int time_since_update = 0;
  motion::KalmanState state;
  BoundingBox predicted_box;
};

struct DetectionCandidate {
  BoundingBox box;
  double confidence = 0.0;
  std::span<const float> embedding;
};

struct MatchResult {
  /// (track index, detection index) into the candidate spans.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Fused appearance/confidence cost with Mahalanobis and appearance gates.
CostMatrix fused_cost_matrix(std::span<const TrackCandidate> tracks,
                             std::span<const std::size_t> track_indices,
                             std::span<const DetectionCandidate> detections,
                             std::span<const std::size_t> detection_indices,
                             const AppearanceGallery& gallery,
                             const AssociationParams& params,
                             const motion::MotionParams& motion_params);

/// Matches by recency: for age = 1..max_age, tracks with
/// time_since_update == age are solved against the detections still free.
/// Tracks outside that age range are returned unmatched.
MatchResult matching_cascade(std::span<const TrackCandidate> tracks,
                             std::span<const std::size_t> track_indices,
                             std::span<const DetectionCandidate> detections,
                             std::span<const std::size_t> detection_indices,
                             const AppearanceGallery& gallery,
                             const AssociationParams& params,
                             const motion::MotionParams& motion_params, int max_age);

/// Cost 1 - IoU(predicted box, detection box); pairs above max_iou_distance
/// are infeasible.
MatchResult iou_match(std::span<const TrackCandidate> tracks,
                      std::span<const std::size_t> track_indices,
                      std::span<const DetectionCandidate> detections,
                      std::span<const std::size_t> detection_indices,
                      double max_iou_distance);

}  // namespace aerotrack::association
