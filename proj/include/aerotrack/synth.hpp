// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "aerotrack/anchors.hpp"
#include "aerotrack/detection.hpp"
#include "aerotrack/embedding_table.hpp"
#include "aerotrack/io.hpp"

namespace aerotrack::synth {

/// Detections of `identity` (0-based) are withheld for frames [first, last].
struct OcclusionWindow {
  std::size_t identity = 0;
  FrameId first = 0;
  FrameId last = 0;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t num_identities = 5;
  std::size_t frames = 100;
  FrameId first_frame = 1;
  anchors::ImageSize image_size{1920, 1080};
  /// Box sides drawn uniformly from this range.
  double min_side = 24.0;
  double max_side = 64.0;
  /// Per-identity velocity components drawn uniformly from [-max_speed, max_speed].
  double max_speed = 3.0;
  /// Gaussian std added to each of left, top, width, height.
  double detection_noise = 0.0;
  double miss_probability = 0.0;
  std::vector<OcclusionWindow> occlusions;
  std::size_t embedding_dim = 32;
  /// Every embedding lies within this cosine distance of its identity's anchor.
  double intra_radius = 0.1;
  /// Required minimum cosine distance between embeddings of different identities.
  double inter_min_distance = 0.8;
  /// Identity i gets classes[i % classes.size()].
  std::vector<int> classes{visdrone::kCar};
  double min_confidence = 0.6;
  double max_confidence = 1.0;

  void validate() const;
};

struct SynthOutput {
  /// Every identity in every frame, ordered by frame then identity.
  std::vector<io::AnnotationRecord> ground_truth;
  DetectionStream detections;
  /// Row i belongs to the i-th detection in stream order.
  EmbeddingTable embeddings;
  /// Identity (0-based) behind each embedding row.
  std::vector<std::size_t> row_identity;
};

/// Deterministic in config (including seed). Throws ValidationError when the
/// separation demand cannot be guaranteed: that needs embedding_dim >
/// num_identities and (1 - intra_radius)^2 >= inter_min_distance.
SynthOutput generate(const SynthConfig& config);

/// Smallest cosine distance between rows of different identities.
double min_inter_identity_distance(const EmbeddingTable& table,
                                   const std::vector<std::size_t>& row_identity);

}  // namespace aerotrack::synth
