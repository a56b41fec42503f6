// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace aerotrack {

bool BoundingBox::valid() const {
  return std::isfinite(left) && std::isfinite(top) && std::isfinite(width) &&
         std::isfinite(height) && width > 0.0 && height > 0.0;
}

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
  // Clamped so rounding in right()/bottom() cannot make a contained box's
  // overlap exceed its own extent.
  const double w = std::min(std::min(a.right(), b.right()) - std::max(a.left, b.left),
                            std::min(a.width, b.width));
  const double h = std::min(std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top),
                            std::min(a.height, b.height));
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoxXYAH to_xyah(const BoundingBox& box) {
  return {box.left + 0.5 * box.width, box.top + 0.5 * box.height,
          box.width / box.height, box.height};
}

BoundingBox from_xyah(const BoxXYAH& box) {
  const double w = box.aspect * box.height;
  return {box.center_x - 0.5 * w, box.center_y - 0.5 * box.height, w,
          box.height};
}

}  // namespace aerotrack
