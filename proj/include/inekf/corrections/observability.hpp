#pragma once

#include "inekf/imu/propagation.hpp"

namespace inekf {

/// Stacked observability matrix [H; H Phi; H Phi^2; ...] of the bias-free
/// velocity-correction model on the 9-dimensional tangent. Its rank is 5 for
/// n_steps >= 3: roll, pitch and velocity are observable, while the rotation
/// about gravity (yaw) and the position stay in the null space.
inline Eigen::MatrixXd observability_matrix(double dt, int n_steps,
                                            const Vec3& gravity = Vec3(0, 0, -9.80665)) {
  if (n_steps < 1) {
    throw DimensionMismatch("observability_matrix: n_steps must be >= 1");
  }
  const EstimatorState ref = EstimatorState::Create(2, false, 1, 1, 1);
  const Eigen::MatrixXd Phi = discretize(error_dynamics_matrix(ref, gravity), dt);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, 9);
  H.block<3, 3>(0, 3).setIdentity();

  Eigen::MatrixXd O(3 * n_steps, 9);
  Eigen::MatrixXd HPhi = H;
  for (int i = 0; i < n_steps; ++i) {
    O.middleRows<3>(3 * i) = HPhi;
    HPhi = (HPhi * Phi).eval();
  }
  return O;
}

}  // namespace inekf
