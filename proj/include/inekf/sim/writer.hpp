#pragma once

#include <filesystem>
#include <set>
#include <sstream>

#include "inekf/io/config.hpp"
#include "inekf/io/csv.hpp"
#include "inekf/sim/sensors.hpp"

namespace inekf::sim {

/// A full synthesis request: trajectory, noise, platform geometry and the
/// set of channels to write.
struct SimJob {
  TrajectorySpec trajectory;
  SensorNoiseSpec noise;
  PlatformSpec platform;
  std::set<std::string> channels = {"imu", "groundtruth"};
};

inline SimJob parse_sim_config(const io::Config& cfg) {
  SimJob job;
  const std::string shape = cfg.get_string("trajectory.shape", "line");
  if (shape == "static") {
    job.trajectory.shape = TrajectoryShape::Static;
  } else if (shape == "line") {
    job.trajectory.shape = TrajectoryShape::Line;
  } else if (shape == "circle") {
    job.trajectory.shape = TrajectoryShape::Circle;
  } else if (shape == "figure_eight") {
    job.trajectory.shape = TrajectoryShape::FigureEight;
  } else {
    throw ConfigError("trajectory.shape must be static, line, circle or figure_eight");
  }
  job.trajectory.speed = cfg.get_double("trajectory.speed", 1.0);
  job.trajectory.radius = cfg.get_double("trajectory.radius", 5.0);
  job.trajectory.duration = cfg.get_double("trajectory.duration", 10.0);
  job.trajectory.imu_rate = cfg.get_double("trajectory.imu_rate", 200.0);
  job.trajectory.aux_rate = cfg.get_double("trajectory.aux_rate", 20.0);
  job.trajectory.seed = static_cast<unsigned long>(cfg.get_double("trajectory.seed", 0));
  job.trajectory.z_amplitude = cfg.get_double("trajectory.z_amplitude", 0.0);
  if (!(job.trajectory.duration > 0) || !(job.trajectory.imu_rate > 0) ||
      !(job.trajectory.aux_rate > 0)) {
    throw ConfigError("trajectory duration and rates must be positive");
  }

  auto& imu = job.noise.imu;
  imu.gyro_density = cfg.get_double("noise.gyro_density", 0.0);
  imu.accel_density = cfg.get_double("noise.accel_density", 0.0);
  imu.gyro_bias_walk = cfg.get_double("noise.gyro_bias_walk", 0.0);
  imu.accel_bias_walk = cfg.get_double("noise.accel_bias_walk", 0.0);
  imu.gravity = cfg.get_vec3("noise.gravity", imu.gravity);
  job.noise.velocity_sigma = cfg.get_double("noise.velocity_sigma", 0.0);
  job.noise.encoder_sigma = cfg.get_double("noise.encoder_sigma", 0.0);
  job.noise.wheel_rate_sigma = cfg.get_double("noise.wheel_rate_sigma", 0.0);
  job.noise.gyro_bias = cfg.get_vec3("noise.gyro_bias", Vec3::Zero());
  job.noise.accel_bias = cfg.get_vec3("noise.accel_bias", Vec3::Zero());

  job.platform.wheel_radius = cfg.get_double("platform.wheel_radius", 0.1);
  job.platform.track_width = cfg.get_double("platform.track_width", 0.4);
  job.platform.hip_height = cfg.get_double("platform.hip_height", 0.3);
  job.platform.stance_duration = cfg.get_double("platform.stance_duration", 0.5);
  job.platform.swing_duration = cfg.get_double("platform.swing_duration", 0.5);
  job.platform.leg_id = cfg.get_int("platform.leg_id", 0);

  if (cfg.has("output.channels")) {
    job.channels.clear();
    std::stringstream ss(cfg.require_string("output.channels"));
    std::string token;
    while (std::getline(ss, token, ',')) {
      const auto a = token.find_first_not_of(" \t");
      const auto b = token.find_last_not_of(" \t");
      if (a == std::string::npos) continue;
      const std::string channel = token.substr(a, b - a + 1);
      if (channel != "imu" && channel != "velocity" && channel != "wheels" &&
          channel != "kin" && channel != "contact" && channel != "groundtruth") {
        throw ConfigError("unknown sim output channel: " + channel);
      }
      job.channels.insert(channel);
    }
  }
  return job;
}

/// Writes the requested channels under out_dir using the CLI log schemas.
inline void write_logs(const SimJob& job, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path base(out_dir);

  if (job.channels.count("imu")) {
    io::write_imu((base / "imu.csv").string(), synthesize_imu(job.trajectory, job.noise));
  }
  if (job.channels.count("velocity")) {
    io::write_velocity((base / "velocity.csv").string(),
                       synthesize_velocity(job.trajectory, job.noise));
  }
  if (job.channels.count("wheels")) {
    io::write_wheels((base / "wheels.csv").string(),
                     synthesize_wheels(job.trajectory, job.noise, job.platform));
  }
  if (job.channels.count("kin")) {
    io::write_kinematics((base / "kin.csv").string(),
                         synthesize_kinematics(job.trajectory, job.noise, job.platform));
  }
  if (job.channels.count("contact")) {
    io::write_contacts((base / "contact.csv").string(),
                       synthesize_contacts(job.trajectory, job.platform));
  }
  if (job.channels.count("groundtruth")) {
    std::vector<metrics::TrajectoryRecord> truth;
    for (const auto& pt : generate(job.trajectory)) {
      metrics::TrajectoryRecord r;
      r.stamp = pt.t;
      r.position = pt.p;
      r.rotation = Eigen::Quaterniond(pt.R);
      r.rotation.normalize();
      r.velocity = pt.v;
      r.has_velocity = true;
      truth.push_back(r);
    }
    io::write_groundtruth((base / "groundtruth.csv").string(), truth);
  }
}

}  // namespace inekf::sim
