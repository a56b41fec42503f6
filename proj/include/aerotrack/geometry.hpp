// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace aerotrack {

/// Axis-aligned box in continuous pixel coordinates, stored as
/// (left, top, width, height). Area is width * height with no +1 convention.
struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double center_x() const { return left + 0.5 * width; }
  double center_y() const { return top + 0.5 * height; }
  double area() const { return width * height; }

  /// True when both sides are strictly positive and every field is finite.
  bool valid() const;

  BoundingBox translated(double dx, double dy) const {
    return {left + dx, top + dy, width, height};
  }

  static BoundingBox from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Measurement space of the motion model: center, aspect (w/h) and height.
struct BoxXYAH {
  double center_x = 0.0;
  double center_y = 0.0;
  double aspect = 0.0;
  double height = 0.0;

  friend bool operator==(const BoxXYAH&, const BoxXYAH&) = default;
};

double intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Intersection over union. Symmetric, in [0, 1]; both boxes must be valid.
double iou(const BoundingBox& a, const BoundingBox& b);

BoxXYAH to_xyah(const BoundingBox& box);
BoundingBox from_xyah(const BoxXYAH& box);

}  // namespace aerotrack
