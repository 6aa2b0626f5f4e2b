#include "cagetrack/kalman.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "cagetrack/errors.hpp"

namespace cagetrack {

MeasurementVector to_measurement(const BBox& b) noexcept {
  return {b.cx(), b.cy(), b.w / b.h, b.h};
}

BBox project(const KalmanState& s) {
  const double cx = s.mean(0);
  const double cy = s.mean(1);
  const double h = s.mean(3);
  const double w = s.mean(2) * h;
  if (!(h > 0.0) || !(w > 0.0)) throw NumericError("DegenerateShape: projected box has non-positive extent");
  return {cx - 0.5 * w, cy - 0.5 * h, w, h};
}

bool covariance_is_spd(const StateCovariance& p) noexcept {
  if (!p.allFinite()) return false;
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  Eigen::LLT<StateCovariance> llt(p);
  return llt.info() == Eigen::Success;
}

StateCovariance KalmanFilter::transition() noexcept {
  StateCovariance f = StateCovariance::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

KalmanState KalmanFilter::init(const BBox& measurement) const {
  KalmanState s;
  s.mean.setZero();
  s.mean.head<4>() = to_measurement(measurement);
  const double h = measurement.h;
  const double pos = 2.0 * cfg_.std_weight_position * h;
  const double vel = 10.0 * cfg_.std_weight_velocity * h;
  StateVector std;
  std << pos, pos, cfg_.aspect_std, pos, vel, vel, cfg_.aspect_vel_std, vel;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

KalmanState KalmanFilter::predict(const KalmanState& s) const {
  const double h = std::abs(s.mean(3));
  const double pos = cfg_.std_weight_position * h;
  const double vel = cfg_.std_weight_velocity * h;
  StateVector std;
  std << pos, pos, cfg_.aspect_std, pos, vel, vel, cfg_.aspect_vel_std, vel;
  const StateCovariance q = std.array().square().matrix().asDiagonal();

  const StateCovariance f = transition();
  KalmanState out;
  out.mean = f * s.mean;
  out.covariance = f * s.covariance * f.transpose() + q;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

MeasurementCovariance KalmanFilter::measurement_noise(const KalmanState& s) const {
  const double h = std::abs(s.mean(3));
  const double pos = cfg_.std_weight_position * h;
  Eigen::Matrix<double, 4, 1> std;
  std << pos, pos, cfg_.measurement_aspect_std, pos;
  return std.array().square().matrix().asDiagonal();
}

KalmanState KalmanFilter::update(const KalmanState& s, const BBox& z, double conf) const {
  return update_with_noise(s, to_measurement(z), measurement_noise(s), conf);
}

KalmanState KalmanFilter::update_with_noise(const KalmanState& s, const MeasurementVector& z,
                                            const MeasurementCovariance& base_noise, double conf) {
  const double c = std::clamp(conf, 0.0, 1.0);
  const MeasurementCovariance r = (1.0 - c) * base_noise;

  // H selects the first four state components, so H P H^T and P H^T are blocks of P.
  const Eigen::Matrix<double, 8, 4> pht = s.covariance.leftCols<4>();
  MeasurementCovariance innovation_cov = s.covariance.topLeftCorner<4, 4>() + r;
  innovation_cov = 0.5 * (innovation_cov + innovation_cov.transpose());

  Eigen::LLT<MeasurementCovariance> llt(innovation_cov);
  if (llt.info() != Eigen::Success) {
    throw NumericError("SingularInnovation: innovation covariance is not positive definite");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S is symmetric.
  const Eigen::Matrix<double, 8, 4> gain = llt.solve(pht.transpose()).transpose();

  KalmanState out;
  const MeasurementVector innovation = z - s.mean.head<4>();
  out.mean = s.mean + gain * innovation;

  // Joseph form keeps the posterior symmetric positive semi-definite.
  Eigen::Matrix<double, 8, 8> ikh = StateCovariance::Identity();
  ikh.leftCols<4>() -= gain;
  out.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

}  // namespace cagetrack
