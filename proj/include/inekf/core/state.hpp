#pragma once

#include <map>
#include <optional>

#include <Eigen/Core>

#include "inekf/lie/sek3.hpp"

namespace inekf {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Which invariant error convention the covariance is expressed in.
enum class ErrorFrame { Right, Left };

/// Gyro and accelerometer bias, tracked as a plain vector alongside the
/// group state (the bias error is an ordinary difference, not a group error).
struct BiasState {
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();

  Vec6 vector() const {
    Vec6 v;
    v << gyro, accel;
    return v;
  }
};

/// Full estimator state: group mean X, optional bias mean, and the dense
/// covariance of the invariant tangent error (bias rows appended when bias
/// estimation is enabled). Tangent ordering: (omega, v, p, d_1.., bg, ba).
struct EstimatorState {
  SEK3 X = SEK3::Identity(2);
  std::optional<BiasState> bias;
  Eigen::MatrixXd P;
  double stamp = 0.0;
  ErrorFrame frame = ErrorFrame::Right;
  std::map<int, int> contact_slots;  // leg_id -> group column index (>= 2)

  int tangent_dim() const { return X.tangent_dim() + (bias ? 6 : 0); }
  int bias_offset() const { return X.tangent_dim(); }

  /// Tangent index of the translational block for group column i (0 = v).
  static int column_offset(int i) { return 3 + 3 * i; }

  /// Identity state with diagonal covariance blocks.
  static EstimatorState Create(int slots, bool with_bias, double attitude_var,
                               double velocity_var, double position_var,
                               double bias_var = 1e-4) {
    EstimatorState s;
    s.X = SEK3::Identity(slots);
    if (with_bias) s.bias = BiasState{};
    const int n = s.tangent_dim();
    s.P = Eigen::MatrixXd::Zero(n, n);
    s.P.block<3, 3>(0, 0) = attitude_var * Mat3::Identity();
    s.P.block<3, 3>(3, 3) = velocity_var * Mat3::Identity();
    s.P.block<3, 3>(6, 6) = position_var * Mat3::Identity();
    for (int i = 2; i < slots; ++i) {
      s.P.block<3, 3>(column_offset(i), column_offset(i)) = position_var * Mat3::Identity();
    }
    if (with_bias) {
      s.P.block<6, 6>(s.bias_offset(), s.bias_offset()) = bias_var * Vec6::Ones().asDiagonal();
    }
    return s;
  }
};

}  // namespace inekf
