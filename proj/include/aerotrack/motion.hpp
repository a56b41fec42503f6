// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "aerotrack/geometry.hpp"

namespace aerotrack::motion {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;
using MeasurementMatrix = Eigen::Matrix<double, 4, 4>;

/// Constant-velocity state over (x, y, a, h, vx, vy, va, vh); x/y is the box
/// center, a = w/h, velocities are per frame.
struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();
};

/// Noise standard deviations are these weights times the current height.
struct MotionParams {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;

  void validate() const;
};

/// 0.95 quantile of the chi-square distribution with 4 degrees of freedom.
inline constexpr double kChi2Gate4Dof = 9.4877;

MeasurementVector to_vector(const BoxXYAH& box);
BoxXYAH to_xyah(const MeasurementVector& v);

KalmanState initiate(const BoxXYAH& measurement, const MotionParams& params = {});

KalmanState predict(const KalmanState& state, const MotionParams& params = {});

/// Distribution of the state in measurement space, observation noise included.
struct Projection {
  MeasurementVector mean;
  MeasurementMatrix covariance;
};
Projection project(const KalmanState& state, const MotionParams& params = {});

/// Joseph-form correction against an (x, y, a, h) observation. Throws
/// ValidationError on a non-finite measurement.
KalmanState update(const KalmanState& state, const BoxXYAH& measurement,
                   const MotionParams& params = {});

/// Squared Mahalanobis distance of each measurement from the projected state.
/// Throws DegenerateTrackError if the projected covariance is not positive
/// definite.
std::vector<double> gating_distance(const KalmanState& state,
                                    std::span<const BoxXYAH> measurements,
                                    const MotionParams& params = {});

/// Squared Mahalanobis distances under an explicit projection.
std::vector<double> mahalanobis_squared(const Projection& projection,
                                        std::span<const BoxXYAH> measurements);

/// Box at the current mean.
BoundingBox mean_box(const KalmanState& state);

}  // namespace aerotrack::motion
