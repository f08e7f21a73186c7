#pragma once

#include <string>

#include "inekf/core/observation.hpp"
#include "inekf/core/state.hpp"

namespace inekf {

/// Per-leg forward-kinematics reading: foot position in the body frame, its
/// Jacobian with respect to the joint encoders, and the encoder covariance.
/// foot_rot_body is the contact frame orientation in the body frame; it only
/// rotates the contact process noise and defaults to the identity.
struct KinematicsMeasurement {
  double stamp = 0.0;
  int leg_id = 0;
  Vec3 foot_pos_body = Vec3::Zero();
  Eigen::MatrixXd jacobian;     // 3 x n_joints
  Eigen::MatrixXd encoder_cov;  // n_joints x n_joints, rad^2
  Mat3 foot_rot_body = Mat3::Identity();
};

struct ContactEvent {
  double stamp = 0.0;
  int leg_id = 0;
  bool in_contact = false;
};

/// Appends the foothold d = p + R h_p(q) as a new group column and grows the
/// covariance as P_new = F P F^T + G Cov(w_q) G^T, where F copies the position
/// rows into the new slot and G = R J_p maps encoder noise into it.
inline EstimatorState contact_augment(const EstimatorState& s,
                                      const KinematicsMeasurement& kin) {
  if (s.contact_slots.count(kin.leg_id)) {
    throw AlreadyAugmented("contact_augment: leg " + std::to_string(kin.leg_id) +
                           " already has a slot");
  }
  const int n_joints = static_cast<int>(kin.jacobian.cols());
  if (kin.jacobian.rows() != 3 || kin.encoder_cov.rows() != n_joints ||
      kin.encoder_cov.cols() != n_joints) {
    throw DimensionMismatch("contact_augment: jacobian/encoder covariance shapes");
  }

  const Mat3& R = s.X.rotation();
  const int gdim = s.X.tangent_dim();
  const int old_dim = s.tangent_dim();
  const int new_dim = old_dim + 3;

  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(new_dim, old_dim);
  F.topLeftCorner(gdim, gdim).setIdentity();
  F.block<3, 3>(gdim, 6).setIdentity();  // new slot error starts as the p error
  if (s.bias) {
    F.block<6, 6>(gdim + 3, gdim).setIdentity();
  }
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(new_dim, n_joints);
  G.block(gdim, 0, 3, n_joints) = R * kin.jacobian;

  EstimatorState out = s;
  out.X = s.X.with_column(s.X.position() + R * kin.foot_pos_body);
  out.P = F * s.P * F.transpose() + G * kin.encoder_cov * G.transpose();
  out.contact_slots[kin.leg_id] = s.X.slots();
  return out;
}

/// Removes a foothold column and its covariance rows; every remaining
/// cross-covariance is carried over untouched (selector conjugation).
inline EstimatorState contact_marginalize(const EstimatorState& s, int leg_id) {
  const auto it = s.contact_slots.find(leg_id);
  if (it == s.contact_slots.end()) {
    throw NotAugmented("contact_marginalize: leg " + std::to_string(leg_id) +
                       " has no slot");
  }
  const int col = it->second;
  const int off = EstimatorState::column_offset(col);
  const int old_dim = s.tangent_dim();
  const int new_dim = old_dim - 3;

  EstimatorState out = s;
  out.X = s.X.without_column(col);
  Eigen::MatrixXd P(new_dim, new_dim);
  P.topLeftCorner(off, off) = s.P.topLeftCorner(off, off);
  P.topRightCorner(off, new_dim - off) = s.P.topRightCorner(off, old_dim - off - 3);
  P.bottomLeftCorner(new_dim - off, off) = s.P.bottomLeftCorner(old_dim - off - 3, off);
  P.bottomRightCorner(new_dim - off, new_dim - off) =
      s.P.bottomRightCorner(old_dim - off - 3, old_dim - off - 3);
  out.P = std::move(P);

  out.contact_slots.erase(leg_id);
  for (auto& [leg, c] : out.contact_slots) {
    if (c > col) --c;
  }
  return out;
}

/// Right-invariant foothold observation:
///   Y = (h_p(q), 0, 1, .., -1 at the slot)  against  b = (0, 0, 1, .., -1),
/// with H = [0 0 -I .. I] placing -I on the position block and +I on the
/// slot block, and N = R J Cov(w_q) J^T R^T.
inline LinearObservation contact_observation(const EstimatorState& s,
                                             const KinematicsMeasurement& kin) {
  const auto it = s.contact_slots.find(kin.leg_id);
  if (it == s.contact_slots.end()) {
    throw NotAugmented("contact_observation: leg " + std::to_string(kin.leg_id) +
                       " has no slot");
  }
  const int col = it->second;
  const int k = s.X.slots();

  LinearObservation obs;
  obs.form = ObservationForm::RightInvariant;
  obs.b = Eigen::VectorXd::Zero(3 + k);
  obs.b(4) = 1.0;        // position column
  obs.b(3 + col) = -1.0; // foothold column
  obs.Y = Eigen::VectorXd::Zero(3 + k);
  obs.Y.head<3>() = kin.foot_pos_body;
  obs.Y(4) = 1.0;
  obs.Y(3 + col) = -1.0;
  obs.H = Eigen::MatrixXd::Zero(3, s.tangent_dim());
  obs.H.block<3, 3>(0, 6) = -Mat3::Identity();
  obs.H.block<3, 3>(0, EstimatorState::column_offset(col)) = Mat3::Identity();
  const Mat3& R = s.X.rotation();
  obs.N = R * kin.jacobian * kin.encoder_cov * kin.jacobian.transpose() * R.transpose();
  return obs;
}

}  // namespace inekf
