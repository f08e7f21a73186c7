#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "inekf/lie/so3.hpp"

namespace inekf {

using Tangent = Eigen::VectorXd;

/// Element of SE_k(3): one rotation and k >= 2 translation-like columns
/// (velocity, position, then any augmented contact points). Embeds as the
/// (3+k) x (3+k) block matrix with an identity lower-right block.
///
/// Tangent vectors are ordered (xi_omega, xi_v, xi_p, xi_d1, ...); that
/// ordering is a library-wide contract shared with the error-dynamics and
/// measurement matrices.
class SEK3 {
 public:
  explicit SEK3(int k = 2) : rotation_(Mat3::Identity()), columns_(check_slots(k), Vec3::Zero()) {}

  SEK3(const Mat3& rotation, std::vector<Vec3> columns)
      : rotation_(rotation), columns_(std::move(columns)) {
    check_slots(static_cast<int>(columns_.size()));
  }

  static SEK3 Identity(int k = 2) { return SEK3(k); }

  int slots() const { return static_cast<int>(columns_.size()); }
  int matrix_dim() const { return 3 + slots(); }
  int tangent_dim() const { return 3 * (slots() + 1); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& column(int i) const { return columns_.at(static_cast<size_t>(i)); }
  const Vec3& velocity() const { return columns_[0]; }
  const Vec3& position() const { return columns_[1]; }

  void set_rotation(const Mat3& R) { rotation_ = R; }
  void set_column(int i, const Vec3& c) { columns_.at(static_cast<size_t>(i)) = c; }

  /// Copy with one extra column appended (state augmentation).
  SEK3 with_column(const Vec3& c) const {
    std::vector<Vec3> cols = columns_;
    cols.push_back(c);
    return SEK3(rotation_, std::move(cols));
  }

  /// Copy with column i removed (marginalization). Requires slots() > 2.
  SEK3 without_column(int i) const {
    if (i < 2 || i >= slots()) {
      throw NotAugmented("SEK3::without_column: column " + std::to_string(i) +
                         " is not an augmented slot");
    }
    std::vector<Vec3> cols = columns_;
    cols.erase(cols.begin() + i);
    return SEK3(rotation_, std::move(cols));
  }

  /// Dense (3+k) x (3+k) embedding.
  Eigen::MatrixXd matrix() const {
    const int n = matrix_dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    m.topLeftCorner<3, 3>() = rotation_;
    for (int i = 0; i < slots(); ++i) {
      m.block<3, 1>(0, 3 + i) = columns_[static_cast<size_t>(i)];
    }
    return m;
  }

  static SEK3 FromMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 5) {
      throw DimensionMismatch("SEK3::FromMatrix: need a square matrix of size >= 5");
    }
    const int k = static_cast<int>(m.rows()) - 3;
    std::vector<Vec3> cols(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      cols[static_cast<size_t>(i)] = m.block<3, 1>(0, 3 + i);
    }
    return SEK3(m.topLeftCorner<3, 3>(), std::move(cols));
  }

 private:
  static int check_slots(int k) {
    if (k < 2) {
      throw SlotMismatch("SEK3 requires k >= 2 slots, got " + std::to_string(k));
    }
    return k;
  }

  Mat3 rotation_;
  std::vector<Vec3> columns_;
};

/// Lie-algebra embedding of a tangent vector: skew(omega) top-left, the
/// translational blocks as columns, zero lower rows.
inline Eigen::MatrixXd sek3_hat(const Tangent& xi) {
  if (xi.size() % 3 != 0 || xi.size() < 9) {
    throw DimensionMismatch("sek3_hat: tangent length must be 3(k+1), k >= 2");
  }
  const int k = static_cast<int>(xi.size()) / 3 - 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 + k, 3 + k);
  m.topLeftCorner<3, 3>() = skew(xi.head<3>());
  for (int i = 0; i < k; ++i) {
    m.block<3, 1>(0, 3 + i) = xi.segment<3>(3 + 3 * i);
  }
  return m;
}

inline Tangent sek3_vee(const Eigen::MatrixXd& m) {
  const int k = static_cast<int>(m.rows()) - 3;
  Tangent xi(3 * (k + 1));
  xi.head<3>() = unskew(m.topLeftCorner<3, 3>());
  for (int i = 0; i < k; ++i) {
    xi.segment<3>(3 + 3 * i) = m.block<3, 1>(0, 3 + i);
  }
  return xi;
}

/// Exponential map. Each translational block maps through the Gamma_1 kernel
/// of the rotational part: exp(xi) = (Gamma_0(w), Gamma_1(w) xi_1, ...).
inline SEK3 exp_sek3(const Tangent& xi) {
  if (xi.size() % 3 != 0 || xi.size() < 9) {
    throw DimensionMismatch("exp_sek3: tangent length must be 3(k+1), k >= 2");
  }
  const int k = static_cast<int>(xi.size()) / 3 - 1;
  const Vec3 omega = xi.head<3>();
  const Mat3 J = gamma(1, omega);
  std::vector<Vec3> cols(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) {
    cols[static_cast<size_t>(i)] = J * xi.segment<3>(3 + 3 * i);
  }
  return SEK3(gamma(0, omega), std::move(cols));
}

/// Logarithm map: SO(3) log plus the analytic Gamma_1 inverse on each column.
/// Throws NearAngularSingularity when the rotation angle is within 1e-6 of pi.
inline Tangent log_sek3(const SEK3& X) {
  const Vec3 omega = so3_log(X.rotation());
  const Mat3 Jinv = gamma1_inverse(omega);
  Tangent xi(X.tangent_dim());
  xi.head<3>() = omega;
  for (int i = 0; i < X.slots(); ++i) {
    xi.segment<3>(3 + 3 * i) = Jinv * X.column(i);
  }
  return xi;
}

inline SEK3 compose(const SEK3& X, const SEK3& Y) {
  if (X.slots() != Y.slots()) {
    throw SlotMismatch("compose: slot counts differ (" + std::to_string(X.slots()) +
                       " vs " + std::to_string(Y.slots()) + ")");
  }
  Mat3 R = X.rotation() * Y.rotation();
  if (orthonormality_error(R) > 1e-9) {
    R = orthonormalize(R);
  }
  std::vector<Vec3> cols(static_cast<size_t>(X.slots()));
  for (int i = 0; i < X.slots(); ++i) {
    cols[static_cast<size_t>(i)] = X.rotation() * Y.column(i) + X.column(i);
  }
  return SEK3(R, std::move(cols));
}

inline SEK3 inverse(const SEK3& X) {
  const Mat3 Rt = X.rotation().transpose();
  std::vector<Vec3> cols(static_cast<size_t>(X.slots()));
  for (int i = 0; i < X.slots(); ++i) {
    cols[static_cast<size_t>(i)] = -(Rt * X.column(i));
  }
  return SEK3(Rt, std::move(cols));
}

inline SEK3 operator*(const SEK3& X, const SEK3& Y) { return compose(X, Y); }

/// Adjoint action on the tangent space: adjoint(X) * xi == vee(X hat(xi) X^-1).
/// Block structure: R on every diagonal block, skew(column_i) * R in the
/// (block i+1, block 0) position.
inline Eigen::MatrixXd adjoint(const SEK3& X) {
  const int n = X.tangent_dim();
  Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(n, n);
  const Mat3& R = X.rotation();
  ad.topLeftCorner<3, 3>() = R;
  for (int i = 0; i < X.slots(); ++i) {
    ad.block<3, 3>(3 + 3 * i, 3 + 3 * i) = R;
    ad.block<3, 3>(3 + 3 * i, 0) = skew(X.column(i)) * R;
  }
  return ad;
}

}  // namespace inekf
