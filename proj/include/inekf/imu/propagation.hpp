#pragma once

#include <Eigen/Core>

#include "inekf/core/update.hpp"

namespace inekf {

struct ImuSample {
  double stamp = 0.0;
  Vec3 omega = Vec3::Zero();  // rad/s, body frame
  Vec3 accel = Vec3::Zero();  // m/s^2, body frame
};

/// Continuous-time noise densities of the inertial process model.
struct ImuNoiseParams {
  double gyro_density = 1e-4;       // rad/s/sqrt(Hz)
  double accel_density = 1e-3;      // m/s^2/sqrt(Hz)
  double gyro_bias_walk = 1e-6;     // rad/s^2/sqrt(Hz)
  double accel_bias_walk = 1e-5;    // m/s^3/sqrt(Hz)
  double contact_density = 1e-3;    // m/s/sqrt(Hz), foothold slip while in contact
  Vec3 gravity = Vec3(0.0, 0.0, -9.80665);
};

/// Strapdown mean integration over one sample held constant for dt:
///   R+ = R Gamma_0(w dt)
///   v+ = v + g dt + R Gamma_1(w dt) a dt
///   p+ = p + v dt + 1/2 g dt^2 + R Gamma_2(w dt) a dt^2
/// with w, a bias-corrected when bias estimation is on. Contact columns and
/// biases are unchanged (constant-foothold and random-walk means).
inline EstimatorState propagate_mean(const EstimatorState& s, const ImuSample& u,
                                     double dt, const Vec3& gravity) {
  if (!(dt > 0.0)) {
    throw NonPositiveDt("propagate_mean: dt must be positive");
  }
  const Vec3 w = s.bias ? Vec3(u.omega - s.bias->gyro) : u.omega;
  const Vec3 a = s.bias ? Vec3(u.accel - s.bias->accel) : u.accel;

  const Vec3 phi = w * dt;
  const Mat3& R = s.X.rotation();

  EstimatorState out = s;
  out.X.set_rotation(R * gamma(0, phi));
  out.X.set_column(0, s.X.velocity() + gravity * dt + R * gamma(1, phi) * a * dt);
  out.X.set_column(1, s.X.position() + s.X.velocity() * dt +
                          0.5 * gravity * dt * dt + R * gamma(2, phi) * a * dt * dt);
  out.stamp = s.stamp + dt;
  return out;
}

/// Right-invariant error dynamics matrix A. Without bias estimation it is
/// constant (gravity and identity blocks only); with bias it additionally
/// carries the -R, -skew(v)R, -skew(p)R, -skew(d)R bias columns.
inline Eigen::MatrixXd error_dynamics_matrix(const EstimatorState& s,
                                             const Vec3& gravity) {
  const int dim = s.tangent_dim();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
  A.block<3, 3>(3, 0) = skew(gravity);
  A.block<3, 3>(6, 3) = Mat3::Identity();
  if (s.bias) {
    const int bo = s.bias_offset();
    const Mat3& R = s.X.rotation();
    A.block<3, 3>(0, bo) = -R;
    A.block<3, 3>(3, bo) = -skew(s.X.velocity()) * R;
    A.block<3, 3>(3, bo + 3) = -R;
    A.block<3, 3>(6, bo) = -skew(s.X.position()) * R;
    for (int i = 2; i < s.X.slots(); ++i) {
      A.block<3, 3>(EstimatorState::column_offset(i), bo) = -skew(s.X.column(i)) * R;
    }
  }
  return A;
}

/// State transition matrix Phi = exp(A dt). A is nilpotent here (degree 3
/// without bias, 4 with), so the Taylor series terminates exactly; the loop
/// still guards against a non-nilpotent argument.
inline Eigen::MatrixXd discretize(const Eigen::MatrixXd& A, double dt) {
  if (!(dt > 0.0)) {
    throw NonPositiveDt("discretize: dt must be positive");
  }
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * A * (dt / k)).eval();
    const double norm = term.cwiseAbs().maxCoeff();
    if (norm == 0.0) break;
    phi += term;
    if (norm < 1e-18 * phi.cwiseAbs().maxCoeff()) break;
  }
  return phi;
}

/// Continuous process noise scaled over one step: block-diagonal
/// diag(Qg, Qa, 0_p, Qd.., Qbg, Qba) * dt. Position rows carry no direct
/// noise; contact rows carry the foothold slip density while augmented.
inline Eigen::MatrixXd build_Qd(const ImuNoiseParams& n, double dt, int slots,
                                bool with_bias) {
  if (!(dt > 0.0)) {
    throw NonPositiveDt("build_Qd: dt must be positive");
  }
  const int dim = 3 * (slots + 1) + (with_bias ? 6 : 0);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dim, dim);
  Q.block<3, 3>(0, 0) = n.gyro_density * n.gyro_density * dt * Mat3::Identity();
  Q.block<3, 3>(3, 3) = n.accel_density * n.accel_density * dt * Mat3::Identity();
  for (int i = 2; i < slots; ++i) {
    const int o = EstimatorState::column_offset(i);
    Q.block<3, 3>(o, o) = n.contact_density * n.contact_density * dt * Mat3::Identity();
  }
  if (with_bias) {
    const int bo = 3 * (slots + 1);
    Q.block<3, 3>(bo, bo) = n.gyro_bias_walk * n.gyro_bias_walk * dt * Mat3::Identity();
    Q.block<3, 3>(bo + 3, bo + 3) =
        n.accel_bias_walk * n.accel_bias_walk * dt * Mat3::Identity();
  }
  return Q;
}

/// P+ = Phi P Phi^T + Ad_X Qd Ad_X^T, the discretized right-invariant
/// covariance propagation. Qd is the discrete noise in the body-referenced
/// tangent; the adjoint rotates it into the world-referenced right error.
inline EstimatorState propagate_covariance(const EstimatorState& s,
                                           const Eigen::MatrixXd& Phi,
                                           const Eigen::MatrixXd& Qd) {
  const int dim = s.tangent_dim();
  if (Phi.rows() != dim || Phi.cols() != dim || Qd.rows() != dim || Qd.cols() != dim) {
    throw DimensionMismatch("propagate_covariance: shapes disagree with state");
  }
  const Eigen::MatrixXd ad = extended_adjoint(s);
  EstimatorState out = s;
  out.P = Phi * s.P * Phi.transpose() + ad * Qd * ad.transpose();
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  return out;
}

/// Full propagation step: mean integration, then covariance with
/// Qd = Phi (Q dt) Phi^T (first-order van Loan discretization).
inline EstimatorState propagate(const EstimatorState& s, const ImuSample& u,
                                double dt, const ImuNoiseParams& noise) {
  if (s.frame != ErrorFrame::Right) {
    throw DimensionMismatch("propagate: state must be in the right-invariant frame");
  }
  const Eigen::MatrixXd A = error_dynamics_matrix(s, noise.gravity);
  const Eigen::MatrixXd Phi = discretize(A, dt);
  const Eigen::MatrixXd Qdt = build_Qd(noise, dt, s.X.slots(), s.bias.has_value());
  const Eigen::MatrixXd Qd = Phi * Qdt * Phi.transpose();
  EstimatorState out = propagate_mean(s, u, dt, noise.gravity);
  out.P = propagate_covariance(s, Phi, Qd).P;
  return out;
}

}  // namespace inekf
