#pragma once

#include <Eigen/Core>

#include "cagetrack/core_types.hpp"

namespace cagetrack {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;
using MeasurementCovariance = Eigen::Matrix<double, 4, 4>;

/// Mean is (cx, cy, aspect w/h, height, and the four per-frame velocities).
struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateCovariance covariance = StateCovariance::Identity();
};

/// Noise schedule. Position and velocity deviations scale with the box height.
struct KalmanConfig {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
  double aspect_std = 1e-2;
  double aspect_vel_std = 1e-5;
  double measurement_aspect_std = 1e-1;
};

MeasurementVector to_measurement(const BBox& b) noexcept;

/// Box at the state mean. Throws NumericError (DegenerateShape) when a*h <= 0 or h <= 0.
BBox project(const KalmanState& s);

/// Symmetric within 1e-9 and Cholesky-factorizable.
bool covariance_is_spd(const StateCovariance& p) noexcept;

/// Constant-velocity filter with detection-confidence adaptive measurement noise.
class KalmanFilter {
 public:
  KalmanFilter() = default;
  explicit KalmanFilter(KalmanConfig cfg) : cfg_(cfg) {}

  const KalmanConfig& config() const noexcept { return cfg_; }

  KalmanState init(const BBox& measurement) const;

  /// One-frame constant-velocity step plus process noise.
  KalmanState predict(const KalmanState& s) const;

  /// Update with R scaled by (1 - conf). conf = 1 replaces the measured
  /// coordinates by the measurement. Throws NumericError (SingularInnovation).
  KalmanState update(const KalmanState& s, const BBox& z, double conf) const;

  /// Base measurement covariance R for the given state (before confidence scaling).
  MeasurementCovariance measurement_noise(const KalmanState& s) const;

  /// Update against an explicit base covariance; exposed for callers that
  /// manage their own noise model.
  static KalmanState update_with_noise(const KalmanState& s, const MeasurementVector& z,
                                       const MeasurementCovariance& base_noise, double conf);

  static StateCovariance transition() noexcept;

 private:
  KalmanConfig cfg_;
};

}  // namespace cagetrack
