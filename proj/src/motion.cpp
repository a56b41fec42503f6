// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "aerotrack/motion.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "aerotrack/error.hpp"

namespace aerotrack::motion {

namespace {

StateMatrix transition() {
  StateMatrix f = StateMatrix::Identity();
  for (int i = 0; i < 4; ++i) f(i, 4 + i) = 1.0;
  return f;
}

Eigen::Matrix<double, 4, 8> observation() {
  Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

const StateMatrix kTransition = transition();
const Eigen::Matrix<double, 4, 8> kObservation = observation();

MeasurementMatrix observation_noise(double height, const MotionParams& params) {
  MeasurementVector std;
  std << params.std_weight_position * height, params.std_weight_position * height,
      1e-1, params.std_weight_position * height;
  return std.array().square().matrix().asDiagonal();
}

bool finite(const BoxXYAH& m) {
  return std::isfinite(m.center_x) && std::isfinite(m.center_y) &&
         std::isfinite(m.aspect) && std::isfinite(m.height);
}

StateMatrix symmetrized(const StateMatrix& p) { return 0.5 * (p + p.transpose()); }

}  // namespace

void MotionParams::validate() const {
  if (!(std_weight_position > 0.0) || !(std_weight_velocity > 0.0)) {
    throw ValidationError("motion noise weights must be > 0");
  }
}

MeasurementVector to_vector(const BoxXYAH& box) {
  MeasurementVector v;
  v << box.center_x, box.center_y, box.aspect, box.height;
  return v;
}

BoxXYAH to_xyah(const MeasurementVector& v) { return {v(0), v(1), v(2), v(3)}; }

KalmanState initiate(const BoxXYAH& measurement, const MotionParams& params) {
  if (!finite(measurement)) throw ValidationError("initiate: non-finite measurement");
  KalmanState state;
  state.mean << to_vector(measurement), MeasurementVector::Zero();
  const double h = measurement.height;
  StateVector std;
  std << 2 * params.std_weight_position * h, 2 * params.std_weight_position * h, 1e-2,
      2 * params.std_weight_position * h, 10 * params.std_weight_velocity * h,
      10 * params.std_weight_velocity * h, 1e-5, 10 * params.std_weight_velocity * h;
  state.covariance = std.array().square().matrix().asDiagonal();
  return state;
}

KalmanState predict(const KalmanState& state, const MotionParams& params) {
  const double h = state.mean(3);
  StateVector std;
  std << params.std_weight_position * h, params.std_weight_position * h, 1e-2,
      params.std_weight_position * h, params.std_weight_velocity * h,
      params.std_weight_velocity * h, 1e-5, params.std_weight_velocity * h;
  const StateMatrix process_noise = std.array().square().matrix().asDiagonal();

  KalmanState next;
  next.mean = kTransition * state.mean;
  next.covariance = symmetrized(
      kTransition * state.covariance * kTransition.transpose() + process_noise);
  return next;
}

Projection project(const KalmanState& state, const MotionParams& params) {
  Projection p;
  p.mean = kObservation * state.mean;
  p.covariance = kObservation * state.covariance * kObservation.transpose() +
                 observation_noise(state.mean(3), params);
  p.covariance = 0.5 * (p.covariance + p.covariance.transpose());
  return p;
}

KalmanState update(const KalmanState& state, const BoxXYAH& measurement,
                   const MotionParams& params) {
  if (!finite(measurement)) throw ValidationError("update: non-finite measurement");
  const Projection proj = project(state, params);
  const Eigen::LLT<MeasurementMatrix> chol(proj.covariance);
  if (!proj.covariance.allFinite() || chol.info() != Eigen::Success) {
    throw DegenerateTrackError("update: projected covariance is not positive definite");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<double, 8, 4> gain =
      chol.solve(kObservation * state.covariance).transpose();
  const MeasurementVector innovation = to_vector(measurement) - proj.mean;

  const StateMatrix i_kh = StateMatrix::Identity() - gain * kObservation;
  const MeasurementMatrix r = observation_noise(state.mean(3), params);

  KalmanState next;
  next.mean = state.mean + gain * innovation;
  next.covariance = symmetrized(i_kh * state.covariance * i_kh.transpose() +
                                gain * r * gain.transpose());
  return next;
}

std::vector<double> mahalanobis_squared(const Projection& projection,
                                        std::span<const BoxXYAH> measurements) {
  const Eigen::LLT<MeasurementMatrix> chol(projection.covariance);
  if (!projection.covariance.allFinite() || chol.info() != Eigen::Success) {
    throw DegenerateTrackError("projected covariance is not positive definite");
  }
  std::vector<double> out;
  out.reserve(measurements.size());
  for (const auto& m : measurements) {
    const MeasurementVector d = to_vector(m) - projection.mean;
    const MeasurementVector z = chol.matrixL().solve(d);
    out.push_back(z.squaredNorm());
  }
  return out;
}

std::vector<double> gating_distance(const KalmanState& state,
                                    std::span<const BoxXYAH> measurements,
                                    const MotionParams& params) {
  return mahalanobis_squared(project(state, params), measurements);
}

BoundingBox mean_box(const KalmanState& state) {
  return from_xyah({state.mean(0), state.mean(1), state.mean(2), state.mean(3)});
}

}  // namespace aerotrack::motion
