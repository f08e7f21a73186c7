#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "inekf/core/observation.hpp"
#include "inekf/core/state.hpp"

namespace inekf {

/// Adjoint of the group state extended with an identity block over the bias
/// rows (the bias error is frame-independent).
inline Eigen::MatrixXd extended_adjoint(const EstimatorState& s) {
  const int n = s.tangent_dim();
  Eigen::MatrixXd ad = Eigen::MatrixXd::Identity(n, n);
  ad.topLeftCorner(s.X.tangent_dim(), s.X.tangent_dim()) = adjoint(s.X);
  return ad;
}

inline Eigen::MatrixXd extended_adjoint_inverse(const EstimatorState& s) {
  const int n = s.tangent_dim();
  Eigen::MatrixXd ad = Eigen::MatrixXd::Identity(n, n);
  ad.topLeftCorner(s.X.tangent_dim(), s.X.tangent_dim()) = adjoint(inverse(s.X));
  return ad;
}

/// Symmetrize and clamp eigenvalues below the floor, keeping P positive
/// semi-definite under roundoff. P is left untouched when already above the
/// floor so repeated calls are bitwise-stable.
inline void enforce_covariance_floor(Eigen::MatrixXd& P, double floor = 1e-12) {
  P = 0.5 * (P + P.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  if (es.eigenvalues().minCoeff() >= floor) return;
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(floor);
  P = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  P = 0.5 * (P + P.transpose()).eval();
}

namespace detail {

// Shared correction mechanics. `z` is the reduced innovation, `H` is already
// expressed in the state's error frame. The mean correction multiplies on the
// side matching that frame; covariance uses the Joseph form.
inline EstimatorState apply_linear_update(const EstimatorState& s,
                                          const Eigen::VectorXd& z,
                                          const Eigen::MatrixXd& H,
                                          const Eigen::MatrixXd& N) {
  const int dim = s.tangent_dim();
  const int rows = static_cast<int>(H.rows());
  if (H.cols() != dim || N.rows() != rows || N.cols() != rows || z.size() != rows) {
    throw DimensionMismatch("update: observation dimensions disagree with state");
  }

  const Eigen::MatrixXd PHt = s.P * H.transpose();
  Eigen::MatrixXd S = H * PHt + N;
  S = 0.5 * (S + S.transpose()).eval();

  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0 || hi / lo > 1e12) {
      throw SingularInnovation("update: innovation covariance condition number > 1e12");
    }
  }

  const Eigen::MatrixXd L = S.llt().solve(PHt.transpose()).transpose();  // P H^T S^-1
  const Eigen::VectorXd delta = L * z;

  EstimatorState out = s;
  const SEK3 correction = exp_sek3(delta.head(s.X.tangent_dim()));
  out.X = (s.frame == ErrorFrame::Right) ? correction * s.X : s.X * correction;
  if (s.bias) {
    out.bias->gyro += delta.segment<3>(s.bias_offset());
    out.bias->accel += delta.segment<3>(s.bias_offset() + 3);
  }

  const Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(dim, dim) - L * H;
  out.P = IKH * s.P * IKH.transpose() + L * N * L.transpose();
  enforce_covariance_floor(out.P);
  return out;
}

inline Eigen::VectorXd reduced_innovation(const Eigen::MatrixXd& Xmat,
                                          const LinearObservation& obs) {
  if (obs.Y.size() != Xmat.rows() || obs.b.size() != Xmat.rows()) {
    throw DimensionMismatch("update: observation vector length != 3 + k");
  }
  const Eigen::VectorXd full = Xmat * obs.Y - obs.b;
  return full.head(obs.rows());
}

}  // namespace detail

/// Right-invariant correction: X+ = exp(L (X Y - b)) X, Joseph-form P.
inline EstimatorState ri_update(const EstimatorState& s, const LinearObservation& obs) {
  if (obs.form != ObservationForm::RightInvariant) {
    throw DimensionMismatch("ri_update: observation is not right-invariant");
  }
  if (s.frame != ErrorFrame::Right) {
    throw DimensionMismatch("ri_update: state covariance is not in the right frame");
  }
  const Eigen::VectorXd z = detail::reduced_innovation(s.X.matrix(), obs);
  return detail::apply_linear_update(s, z, obs.H, obs.N);
}

/// Left-invariant correction: X+ = X exp(L (X^-1 Y - b)), Joseph-form P.
inline EstimatorState li_update(const EstimatorState& s, const LinearObservation& obs) {
  if (obs.form != ObservationForm::LeftInvariant) {
    throw DimensionMismatch("li_update: observation is not left-invariant");
  }
  if (s.frame != ErrorFrame::Left) {
    throw DimensionMismatch("li_update: state covariance is not in the left frame");
  }
  const Eigen::VectorXd z = detail::reduced_innovation(inverse(s.X).matrix(), obs);
  return detail::apply_linear_update(s, z, obs.H, obs.N);
}

/// Exact error-frame switch: the mean is unchanged and the covariance is
/// conjugated by the (extended) adjoint.
inline EstimatorState switch_frame(const EstimatorState& s, ErrorFrame target) {
  if (s.frame == target) return s;
  EstimatorState out = s;
  const Eigen::MatrixXd ad = (target == ErrorFrame::Right)
                                 ? extended_adjoint(s)           // P^r = Ad P^l Ad^T
                                 : extended_adjoint_inverse(s);  // P^l = Ad^-1 P^r Ad^-T
  out.P = ad * s.P * ad.transpose();
  out.frame = target;
  return out;
}

/// Applies an observation of either form to a state in either frame by
/// conjugating H with the adjoint where needed. Agrees exactly with
/// switch-update-switch on the mean, and to first order in the correction
/// on the covariance.
inline EstimatorState apply_observation(const EstimatorState& s,
                                        const LinearObservation& obs) {
  const bool right_state = (s.frame == ErrorFrame::Right);
  if (obs.form == ObservationForm::RightInvariant) {
    const Eigen::VectorXd z = detail::reduced_innovation(s.X.matrix(), obs);
    const Eigen::MatrixXd H = right_state ? obs.H : (obs.H * extended_adjoint(s)).eval();
    return detail::apply_linear_update(s, z, H, obs.N);
  }
  const Eigen::VectorXd z = detail::reduced_innovation(inverse(s.X).matrix(), obs);
  const Eigen::MatrixXd H =
      right_state ? (obs.H * extended_adjoint_inverse(s)).eval() : obs.H;
  return detail::apply_linear_update(s, z, H, obs.N);
}

}  // namespace inekf
