#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "inekf/errors.hpp"
#include "inekf/lie/so3.hpp"

namespace inekf {

using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Linear Kalman filter state over x = [omega; b_g] for fusing two
/// angular-velocity sources. last_alpha is the previous sample of the
/// propagation source, needed by the differencing process model.
struct GyroFilterState {
  Vec3 omega = Vec3::Zero();
  Vec3 bias = Vec3::Zero();
  Mat6 P = Mat6::Identity();
  Vec3 last_alpha = Vec3::Zero();
  double stamp = 0.0;

  static GyroFilterState Init(const Vec3& alpha0, double stamp0,
                              double omega_var = 1e-2, double bias_var = 1e-2) {
    GyroFilterState s;
    s.omega = alpha0;
    s.last_alpha = alpha0;
    s.stamp = stamp0;
    s.P.topLeftCorner<3, 3>() = omega_var * Mat3::Identity();
    s.P.bottomRightCorner<3, 3>() = bias_var * Mat3::Identity();
    s.P.topRightCorner<3, 3>().setZero();
    s.P.bottomLeftCorner<3, 3>().setZero();
    return s;
  }
};

/// Differencing propagation: omega accumulates the change of the alpha
/// source between consecutive samples (a constant alpha bias cancels);
/// the bias state is a random walk. P grows by Q.
inline GyroFilterState gf_propagate(const GyroFilterState& s, const Vec3& alpha,
                                    double stamp, const Mat6& Q) {
  if (!(stamp > s.stamp)) {
    throw NonMonotonicStamp("gf_propagate: stamp must increase");
  }
  GyroFilterState out = s;
  out.omega += alpha - s.last_alpha;
  out.last_alpha = alpha;
  out.stamp = stamp;
  out.P += Q;
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  return out;
}

/// Linear correction with H = [I I] when the measuring source is biased
/// (it reads omega plus the tracked bias) or H = [I 0] when unbiased.
/// Joseph-form covariance update.
inline GyroFilterState gf_correct(const GyroFilterState& s, const Vec3& beta,
                                  bool biased, const Mat3& R) {
  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.leftCols<3>() = Mat3::Identity();
  if (biased) H.rightCols<3>() = Mat3::Identity();

  const Mat3 S = H * s.P * H.transpose() + R;
  {
    Eigen::SelfAdjointEigenSolver<Mat3> es(S);
    const double lo = es.eigenvalues().minCoeff();
    if (lo <= 0.0 || es.eigenvalues().maxCoeff() / lo > 1e12) {
      throw SingularInnovation("gf_correct: innovation covariance is singular");
    }
  }
  const Eigen::Matrix<double, 6, 3> L = s.P * H.transpose() * S.llt().solve(Mat3::Identity());

  Eigen::Matrix<double, 6, 1> x;
  x << s.omega, s.bias;
  const Vec3 innovation = beta - H * x;
  x += L * innovation;

  GyroFilterState out = s;
  out.omega = x.head<3>();
  out.bias = x.tail<3>();
  const Mat6 IKH = Mat6::Identity() - L * H;
  out.P = IKH * s.P * IKH.transpose() + L * R * L.transpose();
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  return out;
}

}  // namespace inekf
