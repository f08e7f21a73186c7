#pragma once

#include "inekf/core/observation.hpp"
#include "inekf/core/state.hpp"

namespace inekf {

struct VelocityMeasurement {
  double stamp = 0.0;
  Vec3 v_body = Vec3::Zero();       // m/s, body frame
  Mat3 cov = Mat3::Identity();      // (m/s)^2
};

struct WheelRates {
  double stamp = 0.0;
  double qdot_right = 0.0;          // rad/s
  double qdot_left = 0.0;           // rad/s
  double wheel_radius = 0.0;        // m
};

/// Nonholonomic pseudo-velocity from differential wheel rates:
/// v = (r (qdot_r + qdot_l) / 2, 0, 0), with the lateral and vertical
/// components pinned to zero by the no-slip / no-jump constraints.
inline VelocityMeasurement wheel_pseudo_velocity(const WheelRates& w,
                                                 double lateral_sigma,
                                                 double vertical_sigma,
                                                 double forward_sigma) {
  if (!(w.wheel_radius > 0.0)) {
    throw DimensionMismatch("wheel_pseudo_velocity: wheel radius must be positive");
  }
  VelocityMeasurement m;
  m.stamp = w.stamp;
  m.v_body = Vec3(w.wheel_radius * (w.qdot_right + w.qdot_left) / 2.0, 0.0, 0.0);
  m.cov = Vec3(forward_sigma * forward_sigma, lateral_sigma * lateral_sigma,
               vertical_sigma * vertical_sigma)
              .asDiagonal();
  return m;
}

/// Right-invariant body-velocity observation:
///   Y = (v_meas, -1, 0, ..)  against  b = (0, -1, 0, ..),
/// so the innovation reduces to R v_meas - v_hat. H selects the velocity
/// block of the tangent; N is the sensor covariance rotated into the world.
inline LinearObservation velocity_observation(const EstimatorState& s,
                                              const VelocityMeasurement& m) {
  const int k = s.X.slots();
  LinearObservation obs;
  obs.form = ObservationForm::RightInvariant;
  obs.b = Eigen::VectorXd::Zero(3 + k);
  obs.b(3) = -1.0;
  obs.Y = Eigen::VectorXd::Zero(3 + k);
  obs.Y.head<3>() = m.v_body;
  obs.Y(3) = -1.0;
  obs.H = Eigen::MatrixXd::Zero(3, s.tangent_dim());
  obs.H.block<3, 3>(0, 3) = Mat3::Identity();
  obs.N = s.X.rotation() * m.cov * s.X.rotation().transpose();
  return obs;
}

}  // namespace inekf
