// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/detection.hpp"

namespace aerotrack::visdrone {

const char* category_name(int class_id) {
  switch (class_id) {
    case kIgnoredRegion: return "ignored";
    case kPedestrian: return "pedestrian";
    case kPeople: return "people";
    case kBicycle: return "bicycle";
    case kCar: return "car";
    case kVan: return "van";
    case kTruck: return "truck";
    case kTricycle: return "tricycle";
    case kAwningTricycle: return "awning-tricycle";
    case kBus: return "bus";
    case kMotor: return "motor";
    case kOthers: return "others";
    default: return "unknown";
  }
}

}  // namespace aerotrack::visdrone
