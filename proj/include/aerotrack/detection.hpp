// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "aerotrack/geometry.hpp"

namespace aerotrack {

using FrameId = std::int64_t;

// VisDrone category ids. 0 marks ignored regions and 11 "others"; neither is
// an object class.
namespace visdrone {
inline constexpr int kIgnoredRegion = 0;
inline constexpr int kPedestrian = 1;
inline constexpr int kPeople = 2;
inline constexpr int kBicycle = 3;
inline constexpr int kCar = 4;
inline constexpr int kVan = 5;
inline constexpr int kTruck = 6;
inline constexpr int kTricycle = 7;
inline constexpr int kAwningTricycle = 8;
inline constexpr int kBus = 9;
inline constexpr int kMotor = 10;
inline constexpr int kOthers = 11;

inline bool is_object_class(int class_id) {
  return class_id >= kPedestrian && class_id <= kMotor;
}

const char* category_name(int class_id);
}  // namespace visdrone

struct Detection {
  FrameId frame_id = 0;
  BoundingBox box;
  int class_id = 0;
  double confidence = 0.0;
  /// Row of the companion embedding table, when one exists.
  std::optional<std::size_t> embedding_ref;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// All detections of one frame, in file order.
struct FrameDetections {
  FrameId frame_id = 0;
  std::vector<Detection> detections;

  friend bool operator==(const FrameDetections&,
                         const FrameDetections&) = default;
};

/// Frames in ascending id order.
using DetectionStream = std::vector<FrameDetections>;

}  // namespace aerotrack
