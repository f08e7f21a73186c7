#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "inekf/errors.hpp"

namespace inekf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Skew-symmetric matrix of v, so that skew(v) * w == v.cross(w).
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  // clang-format off
  m <<     0, -v(2),  v(1),
        v(2),     0, -v(0),
       -v(1),  v(0),     0;
  // clang-format on
  return m;
}

/// Inverse of skew(); the anti-symmetric part of m is used.
inline Vec3 unskew(const Mat3& m) {
  return Vec3(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
              0.5 * (m(1, 0) - m(0, 1)));
}

namespace detail {

// Series coefficients of the rotation integrals:
//   Gamma_m(phi) = sum_n phi_hat^n / (n + m)!
// Closed forms divide by ||phi|| powers; below this angle a 4th-order
// Taylor expansion of the scalar coefficients is used instead.
constexpr double kSmallAngle = 1e-7;

struct GammaCoeffs {
  double c1;  // multiplies skew(phi)
  double c2;  // multiplies skew(phi)^2
};

inline GammaCoeffs gamma0_coeffs(double theta) {
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return {1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0};
  }
  const double t2 = theta * theta;
  return {std::sin(theta) / theta, (1.0 - std::cos(theta)) / t2};
}

inline GammaCoeffs gamma1_coeffs(double theta) {
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return {0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0};
  }
  const double t2 = theta * theta;
  return {(1.0 - std::cos(theta)) / t2, (theta - std::sin(theta)) / (t2 * theta)};
}

inline GammaCoeffs gamma2_coeffs(double theta) {
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    return {1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
            1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0};
  }
  const double t2 = theta * theta;
  return {(theta - std::sin(theta)) / (t2 * theta),
          (t2 + 2.0 * std::cos(theta) - 2.0) / (2.0 * t2 * t2)};
}

}  // namespace detail

/// Rotation integral kernels: Gamma_0 = exp(skew(phi)), Gamma_1 and Gamma_2
/// are its first and second normalized time integrals over a unit interval.
inline Mat3 gamma(int m, const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 px = skew(phi);
  const Mat3 px2 = px * px;
  switch (m) {
    case 0: {
      const auto c = detail::gamma0_coeffs(theta);
      return Mat3::Identity() + c.c1 * px + c.c2 * px2;
    }
    case 1: {
      const auto c = detail::gamma1_coeffs(theta);
      return Mat3::Identity() + c.c1 * px + c.c2 * px2;
    }
    case 2: {
      const auto c = detail::gamma2_coeffs(theta);
      return 0.5 * Mat3::Identity() + c.c1 * px + c.c2 * px2;
    }
    default:
      throw DimensionMismatch("gamma: m must be 0, 1 or 2");
  }
}

/// Rodrigues formula.
inline Mat3 so3_exp(const Vec3& phi) { return gamma(0, phi); }

/// Analytic inverse of Gamma_1 (the inverse left Jacobian of SO(3)).
inline Mat3 gamma1_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 px = skew(phi);
  double c2;
  if (theta < 1e-4) {
    const double t2 = theta * theta;
    c2 = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    c2 = 1.0 / (theta * theta) -
         (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() - 0.5 * px + c2 * px * px;
}

/// Rotation-matrix logarithm. Refuses within 1e-6 of the angle-pi
/// singularity, where the axis is not recoverable to the library's accuracy.
inline Vec3 so3_log(const Mat3& R) {
  const double cos_theta = std::min(1.0, std::max(-1.0, 0.5 * (R.trace() - 1.0)));
  const double theta = std::acos(cos_theta);
  if (theta >= M_PI - 1e-6) {
    throw NearAngularSingularity("so3_log: rotation angle within 1e-6 of pi");
  }
  const Vec3 w = unskew(R);  // = sin(theta) * axis
  if (theta < detail::kSmallAngle) {
    return w;  // sin(theta)/theta = 1 to full precision here
  }
  return (theta / std::sin(theta)) * w;
}

/// Nearest rotation matrix in the Frobenius sense (polar projection).
inline Mat3 orthonormalize(const Mat3& R) {
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    out = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return out;
}

/// Frobenius distance of R^T R from the identity.
inline double orthonormality_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

/// Geodesic angle of a rotation matrix, in radians. The atan2 form stays
/// accurate near zero where acos of the trace loses half the digits.
inline double rotation_angle(const Mat3& R) {
  const double sin_theta = unskew(R).norm();
  const double cos_theta = 0.5 * (R.trace() - 1.0);
  return std::atan2(sin_theta, cos_theta);
}

}  // namespace inekf
