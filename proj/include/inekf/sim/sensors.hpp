#pragma once

#include <random>

#include "inekf/corrections/contact.hpp"
#include "inekf/corrections/velocity.hpp"
#include "inekf/imu/propagation.hpp"
#include "inekf/sim/trajectory.hpp"

namespace inekf::sim {

/// Sensor-noise magnitudes for synthesis. IMU densities convert to per-sample
/// standard deviations as sigma = density * sqrt(rate); the remaining sigmas
/// are already per sample.
struct SensorNoiseSpec {
  ImuNoiseParams imu;
  double velocity_sigma = 0.0;    // m/s (DVL-style body velocity)
  double encoder_sigma = 0.0;     // rad, per joint
  double wheel_rate_sigma = 0.0;  // rad/s
  Vec3 gyro_bias = Vec3::Zero();  // injected true biases
  Vec3 accel_bias = Vec3::Zero();
};

/// Geometry of the synthetic platforms.
struct PlatformSpec {
  double wheel_radius = 0.1;    // m
  double track_width = 0.4;     // m
  double hip_height = 0.3;      // m, stub leg
  double stance_duration = 0.5; // s
  double swing_duration = 0.5;  // s
  double swing_lift = 0.08;     // m
  int leg_id = 0;
};

namespace detail {

class GaussianStream {
 public:
  GaussianStream(unsigned long seed, unsigned long salt) : rng_(seed ^ (salt * 0x9E3779B97F4A7C15ull)) {}
  double operator()(double sigma) { return sigma > 0.0 ? sigma * normal_(rng_) : 0.0; }
  Vec3 vec(double sigma) { return Vec3((*this)(sigma), (*this)(sigma), (*this)(sigma)); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

}  // namespace detail

/// Inverse IMU model along the trajectory: omega from the exact body rate,
/// accel as R^T (dv/dt - g), plus injected bias and white noise.
inline std::vector<ImuSample> synthesize_imu(const TrajectorySpec& spec,
                                             const SensorNoiseSpec& noise) {
  detail::GaussianStream gyro_noise(spec.seed, 1), accel_noise(spec.seed, 2);
  const double rate = spec.imu_rate;
  const double gyro_sigma = noise.imu.gyro_density * std::sqrt(rate);
  const double accel_sigma = noise.imu.accel_density * std::sqrt(rate);

  std::vector<ImuSample> out;
  const int n = static_cast<int>(std::llround(spec.duration * rate));
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const TrajectoryPoint pt = evaluate(spec, i / rate);
    ImuSample s;
    s.stamp = pt.t;
    s.omega = pt.omega_body + noise.gyro_bias + gyro_noise.vec(gyro_sigma);
    s.accel = pt.R.transpose() * (pt.accel_world - noise.imu.gravity) +
              noise.accel_bias + accel_noise.vec(accel_sigma);
    out.push_back(s);
  }
  return out;
}

/// Ground-referenced body velocity (DVL-style) at the auxiliary rate.
inline std::vector<VelocityMeasurement> synthesize_velocity(
    const TrajectorySpec& spec, const SensorNoiseSpec& noise) {
  detail::GaussianStream vel_noise(spec.seed, 3);
  std::vector<VelocityMeasurement> out;
  const int n = static_cast<int>(std::llround(spec.duration * spec.aux_rate));
  const double var = std::max(noise.velocity_sigma * noise.velocity_sigma, 1e-12);
  for (int i = 1; i <= n; ++i) {
    const TrajectoryPoint pt = evaluate(spec, i / spec.aux_rate);
    VelocityMeasurement m;
    m.stamp = pt.t;
    m.v_body = pt.R.transpose() * pt.v + vel_noise.vec(noise.velocity_sigma);
    m.cov = var * Mat3::Identity();
    out.push_back(m);
  }
  return out;
}

/// Differential-drive wheel rates consistent with the planar trajectory.
inline std::vector<WheelRates> synthesize_wheels(const TrajectorySpec& spec,
                                                 const SensorNoiseSpec& noise,
                                                 const PlatformSpec& platform) {
  if (!is_planar(spec)) {
    throw IncompatibleShape("synthesize_wheels: trajectory is not planar");
  }
  detail::GaussianStream rate_noise(spec.seed, 4);
  std::vector<WheelRates> out;
  const int n = static_cast<int>(std::llround(spec.duration * spec.aux_rate));
  for (int i = 1; i <= n; ++i) {
    const TrajectoryPoint pt = evaluate(spec, i / spec.aux_rate);
    const double forward = (pt.R.transpose() * pt.v).x();
    const double yaw_rate = pt.omega_body.z();
    WheelRates w;
    w.stamp = pt.t;
    w.wheel_radius = platform.wheel_radius;
    w.qdot_right = (forward + 0.5 * yaw_rate * platform.track_width) / platform.wheel_radius +
                   rate_noise(noise.wheel_rate_sigma);
    w.qdot_left = (forward - 0.5 * yaw_rate * platform.track_width) / platform.wheel_radius +
                  rate_noise(noise.wheel_rate_sigma);
    out.push_back(w);
  }
  return out;
}

namespace detail {

// Piecewise gait clock for the stub leg.
struct GaitPhase {
  bool stance;
  int cycle;
  double phase;  // in [0, 1) within the stance or swing segment
};

inline GaitPhase gait_at(const PlatformSpec& g, double t) {
  const double period = g.stance_duration + g.swing_duration;
  const int cycle = static_cast<int>(std::floor(t / period));
  const double local = t - cycle * period;
  if (local < g.stance_duration) {
    return {true, cycle, local / g.stance_duration};
  }
  return {false, cycle, (local - g.stance_duration) / g.swing_duration};
}

// World foothold held during stance n: under the body at the stance start.
inline Vec3 foothold(const TrajectorySpec& spec, const PlatformSpec& g, int cycle) {
  const double period = g.stance_duration + g.swing_duration;
  const TrajectoryPoint pt = evaluate(spec, cycle * period);
  return pt.p + pt.R * Vec3(0, 0, -g.hip_height);
}

inline double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }

}  // namespace detail

/// Stub one-leg forward kinematics at the auxiliary rate. During stance the
/// foot holds the world-frame foothold; during swing it blends smoothly to
/// the next foothold, so the sample preceding touchdown is consistent with
/// the foothold the filter will augment.
inline std::vector<KinematicsMeasurement> synthesize_kinematics(
    const TrajectorySpec& spec, const SensorNoiseSpec& noise,
    const PlatformSpec& platform) {
  detail::GaussianStream enc_noise(spec.seed, 5);
  std::vector<KinematicsMeasurement> out;
  const int n = static_cast<int>(std::llround(spec.duration * spec.aux_rate));
  for (int i = 0; i <= n; ++i) {
    const double t = i / spec.aux_rate;
    const TrajectoryPoint pt = evaluate(spec, t);
    const auto phase = detail::gait_at(platform, t);
    Vec3 foot_world;
    if (phase.stance) {
      foot_world = detail::foothold(spec, platform, phase.cycle);
    } else {
      const Vec3 from = detail::foothold(spec, platform, phase.cycle);
      const Vec3 to = detail::foothold(spec, platform, phase.cycle + 1);
      const double s = detail::smoothstep(phase.phase);
      foot_world = (1.0 - s) * from + s * to +
                   platform.swing_lift * std::sin(M_PI * phase.phase) * Vec3::UnitZ();
    }
    KinematicsMeasurement kin;
    kin.stamp = t;
    kin.leg_id = platform.leg_id;
    kin.jacobian = Eigen::MatrixXd::Identity(3, 3);
    kin.encoder_cov = std::max(noise.encoder_sigma * noise.encoder_sigma, 1e-12) *
                      Eigen::MatrixXd::Identity(3, 3);
    kin.foot_pos_body =
        pt.R.transpose() * (foot_world - pt.p) + enc_noise.vec(noise.encoder_sigma);
    out.push_back(kin);
  }
  return out;
}

/// Per-sample stance flags of the stub gait at the auxiliary rate.
inline std::vector<ContactEvent> synthesize_contacts(const TrajectorySpec& spec,
                                                     const PlatformSpec& platform) {
  std::vector<ContactEvent> out;
  const int n = static_cast<int>(std::llround(spec.duration * spec.aux_rate));
  for (int i = 0; i <= n; ++i) {
    const double t = i / spec.aux_rate;
    out.push_back(ContactEvent{t, platform.leg_id, detail::gait_at(platform, t).stance});
  }
  return out;
}

}  // namespace inekf::sim
