#pragma once

#include <Eigen/Core>

namespace inekf {

enum class ObservationForm { RightInvariant, LeftInvariant };

/// Linearized invariant observation, already reduced to its informative rows.
///
/// For form RightInvariant the raw measurement satisfies Y = X^-1 b + V and
/// the innovation is the leading rows of (X_hat * Y - b); for LeftInvariant,
/// Y = X b + V with innovation rows of (X_hat^-1 * Y - b). H maps the full
/// tangent (bias columns included, zero unless stated) to those rows. N is
/// the noise covariance of the reduced innovation, i.e. already conjugated
/// into the error frame (R_hat Cov R_hat^T for right-invariant observations).
struct LinearObservation {
  Eigen::VectorXd b;
  Eigen::VectorXd Y;
  Eigen::MatrixXd H;
  Eigen::MatrixXd N;
  ObservationForm form = ObservationForm::RightInvariant;

  int rows() const { return static_cast<int>(H.rows()); }
};

}  // namespace inekf
