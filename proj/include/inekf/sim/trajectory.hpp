#pragma once

#include <cmath>
#include <vector>

#include "inekf/errors.hpp"
#include "inekf/lie/so3.hpp"

namespace inekf::sim {

enum class TrajectoryShape { Static, Line, Circle, FigureEight };

struct TrajectorySpec {
  TrajectoryShape shape = TrajectoryShape::Line;
  double speed = 1.0;        // m/s
  double radius = 5.0;       // m, circle radius / figure-eight half-width
  double duration = 10.0;    // s
  double imu_rate = 200.0;   // Hz
  double aux_rate = 20.0;    // Hz, velocity / kinematics / contact channels
  unsigned long seed = 0;
  double z_amplitude = 0.0;  // m, figure-eight depth oscillation (marine)
};

/// One sample of the analytic ground truth with its exact derivatives.
struct TrajectoryPoint {
  double t = 0.0;
  Mat3 R = Mat3::Identity();
  Vec3 v = Vec3::Zero();            // world frame
  Vec3 p = Vec3::Zero();
  Vec3 omega_body = Vec3::Zero();   // body angular rate
  Vec3 accel_world = Vec3::Zero();  // dv/dt, world frame
};

inline bool is_planar(const TrajectorySpec& spec) {
  return !(spec.shape == TrajectoryShape::FigureEight && spec.z_amplitude != 0.0);
}

/// Closed-form trajectory evaluation; every returned quantity is the exact
/// analytic derivative of the position curve (C^2 by construction).
inline TrajectoryPoint evaluate(const TrajectorySpec& spec, double t) {
  TrajectoryPoint out;
  out.t = t;
  switch (spec.shape) {
    case TrajectoryShape::Static:
      break;
    case TrajectoryShape::Line:
      out.p = Vec3(spec.speed * t, 0, 0);
      out.v = Vec3(spec.speed, 0, 0);
      break;
    case TrajectoryShape::Circle: {
      const double w = spec.speed / spec.radius;
      const double th = w * t;
      out.p = spec.radius * Vec3(std::cos(th), std::sin(th), 0);
      out.v = spec.radius * w * Vec3(-std::sin(th), std::cos(th), 0);
      out.accel_world = -spec.radius * w * w * Vec3(std::cos(th), std::sin(th), 0);
      out.R = Eigen::AngleAxisd(th + M_PI / 2, Vec3::UnitZ()).toRotationMatrix();
      out.omega_body = Vec3(0, 0, w);
      break;
    }
    case TrajectoryShape::FigureEight: {
      const double w = spec.speed / spec.radius;
      const double A = spec.radius;
      const double B = spec.radius / 2.0;
      const double Z = spec.z_amplitude;
      out.p = Vec3(A * std::sin(w * t), B * std::sin(2 * w * t), Z * std::sin(w * t));
      out.v = Vec3(A * w * std::cos(w * t), 2 * B * w * std::cos(2 * w * t),
                   Z * w * std::cos(w * t));
      out.accel_world =
          Vec3(-A * w * w * std::sin(w * t), -4 * B * w * w * std::sin(2 * w * t),
               -Z * w * w * std::sin(w * t));
      const double vx = out.v.x(), vy = out.v.y();
      const double ax = out.accel_world.x(), ay = out.accel_world.y();
      const double yaw = std::atan2(vy, vx);
      const double yaw_rate = (vx * ay - vy * ax) / (vx * vx + vy * vy);
      out.R = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
      out.omega_body = Vec3(0, 0, yaw_rate);
      break;
    }
  }
  return out;
}

/// Ground-truth stream sampled at the IMU rate.
inline std::vector<TrajectoryPoint> generate(const TrajectorySpec& spec) {
  if (!(spec.imu_rate > 0.0) || !(spec.aux_rate > 0.0) || !(spec.duration > 0.0)) {
    throw ConfigError("generate: rates and duration must be positive");
  }
  const double dt = 1.0 / spec.imu_rate;
  const int n = static_cast<int>(std::llround(spec.duration * spec.imu_rate));
  std::vector<TrajectoryPoint> out;
  out.reserve(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out.push_back(evaluate(spec, i * dt));
  return out;
}

/// Arc length of the position curve, by fine trapezoidal sums on the exact
/// speed profile.
inline double arc_length(const TrajectorySpec& spec) {
  const int n = 20000;
  const double dt = spec.duration / n;
  double len = 0.0;
  double prev = evaluate(spec, 0.0).v.norm();
  for (int i = 1; i <= n; ++i) {
    const double cur = evaluate(spec, i * dt).v.norm();
    len += 0.5 * (prev + cur) * dt;
    prev = cur;
  }
  return len;
}

}  // namespace inekf::sim
