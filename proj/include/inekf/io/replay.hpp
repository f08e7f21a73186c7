#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <thread>

#include "inekf/core/filter.hpp"
#include "inekf/gyro/gyro_filter.hpp"
#include "inekf/io/config.hpp"
#include "inekf/io/csv.hpp"

namespace inekf::io {

/// Everything the replay needs, parsed from one config file.
struct PipelineOptions {
  std::string platform = "generic";  // wheeled | legged | marine | generic
  FilterConfig filter;
  bool bias_estimation = true;

  // Initial state and covariance diagonals.
  Vec3 init_position = Vec3::Zero();
  Vec3 init_velocity = Vec3::Zero();
  Vec3 init_rpy_deg = Vec3::Zero();
  bool init_from_accel = false;
  double init_attitude_var = 1e-2;
  double init_velocity_var = 1e-2;
  double init_position_var = 1e-4;
  double init_bias_var = 1e-4;

  // Sensor geometry and per-file noise defaults.
  double wheel_radius = 0.1;
  double track_width = 0.4;
  double velocity_sigma = 0.05;

  // Optional gyro filter (yaw de-biasing by default).
  bool gyro_filter = false;
  Vec3 gyro_axis_mask = Vec3(0, 0, 1);
  double gyro_q_omega = 1e-5;
  double gyro_q_bias = 1e-6;
  double gyro_alpha_sigma = 0.01;  // rad/s, biased correction from the base gyro
  double gyro_beta_sigma = 0.02;   // rad/s, unbiased correction source
  bool gyro_correct_with_alpha = true;

  // GRF thresholding (used when a grf channel is bound).
  ThresholdConfig grf;

  int threads = 1;  // 1 or 2 (parse thread + filter thread)

  std::map<std::string, std::string> files;  // channel name -> path
};

inline PipelineOptions parse_pipeline_config(const Config& cfg,
                                             const std::string& base_dir) {
  PipelineOptions opt;
  opt.platform = cfg.get_string("pipeline.platform", "generic");
  if (opt.platform != "wheeled" && opt.platform != "legged" &&
      opt.platform != "marine" && opt.platform != "generic") {
    throw ConfigError("pipeline.platform must be wheeled, legged, marine or generic");
  }
  opt.bias_estimation = cfg.get_bool("pipeline.bias_estimation", true);
  opt.threads = cfg.get_int("pipeline.threads", 1);
  if (opt.threads != 1 && opt.threads != 2) {
    throw ConfigError("pipeline.threads must be 1 or 2");
  }

  auto& noise = opt.filter.noise;
  noise.gyro_density = cfg.get_double("imu.gyro_density", noise.gyro_density);
  noise.accel_density = cfg.get_double("imu.accel_density", noise.accel_density);
  noise.gyro_bias_walk = cfg.get_double("imu.gyro_bias_walk", noise.gyro_bias_walk);
  noise.accel_bias_walk = cfg.get_double("imu.accel_bias_walk", noise.accel_bias_walk);
  noise.contact_density = cfg.get_double("imu.contact_density", noise.contact_density);
  noise.gravity = cfg.get_vec3("imu.gravity", noise.gravity);

  opt.filter.wheel_forward_sigma =
      cfg.get_double("wheels.forward_sigma", opt.filter.wheel_forward_sigma);
  opt.filter.wheel_lateral_sigma =
      cfg.get_double("wheels.lateral_sigma", opt.filter.wheel_lateral_sigma);
  opt.filter.wheel_vertical_sigma =
      cfg.get_double("wheels.vertical_sigma", opt.filter.wheel_vertical_sigma);
  opt.wheel_radius = cfg.get_double("wheels.radius", opt.wheel_radius);
  opt.track_width = cfg.get_double("wheels.track_width", opt.track_width);

  opt.velocity_sigma = cfg.get_double("velocity.sigma", opt.velocity_sigma);

  opt.filter.out_of_order_slack =
      cfg.get_double("pipeline.out_of_order_slack", opt.filter.out_of_order_slack);
  opt.filter.kinematics_staleness =
      cfg.get_double("pipeline.kinematics_staleness", opt.filter.kinematics_staleness);

  opt.filter.accept_kinematics =
      opt.platform == "legged" || opt.platform == "generic";
  opt.filter.accept_contacts = opt.filter.accept_kinematics;

  opt.init_position = cfg.get_vec3("init.position", opt.init_position);
  opt.init_velocity = cfg.get_vec3("init.velocity", opt.init_velocity);
  opt.init_rpy_deg = cfg.get_vec3("init.rpy_deg", opt.init_rpy_deg);
  opt.init_from_accel = cfg.get_bool("init.from_accel", false);
  opt.init_attitude_var = cfg.get_double("init.attitude_var", opt.init_attitude_var);
  opt.init_velocity_var = cfg.get_double("init.velocity_var", opt.init_velocity_var);
  opt.init_position_var = cfg.get_double("init.position_var", opt.init_position_var);
  opt.init_bias_var = cfg.get_double("init.bias_var", opt.init_bias_var);
  if (opt.init_attitude_var <= 0 || opt.init_velocity_var <= 0 ||
      opt.init_position_var <= 0 || opt.init_bias_var <= 0) {
    throw ConfigError("init covariance diagonals must be positive");
  }

  opt.gyro_filter = cfg.get_bool("gyro_filter.enabled", false);
  opt.gyro_axis_mask = cfg.get_vec3("gyro_filter.axis_mask", opt.gyro_axis_mask);
  opt.gyro_q_omega = cfg.get_double("gyro_filter.q_omega", opt.gyro_q_omega);
  opt.gyro_q_bias = cfg.get_double("gyro_filter.q_bias", opt.gyro_q_bias);
  opt.gyro_alpha_sigma = cfg.get_double("gyro_filter.alpha_sigma", opt.gyro_alpha_sigma);
  opt.gyro_beta_sigma = cfg.get_double("gyro_filter.beta_sigma", opt.gyro_beta_sigma);
  opt.gyro_correct_with_alpha =
      cfg.get_bool("gyro_filter.correct_with_alpha", opt.gyro_correct_with_alpha);

  opt.grf.cutoff_hz = cfg.get_double("grf.cutoff_hz", 20.0);
  opt.grf.on_threshold = cfg.get_double("grf.on_threshold", 0.0);
  opt.grf.off_threshold = cfg.get_double("grf.off_threshold", 0.0);
  opt.grf.min_dwell = cfg.get_double("grf.min_dwell", 0.01);

  const std::filesystem::path base(base_dir);
  for (const char* channel :
       {"imu", "wheels", "velocity", "kin", "contact", "grf", "groundtruth"}) {
    const std::string key = std::string("files.") + channel;
    if (!cfg.has(key)) continue;
    std::filesystem::path p(cfg.require_string(key));
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) {
      throw ConfigError("bound file does not exist: " + p.string());
    }
    opt.files[channel] = p.string();
  }
  if (!opt.files.count("imu")) {
    throw ConfigError("files.imu is required");
  }
  if (opt.files.count("grf") &&
      !(opt.grf.on_threshold > 0.0 && opt.grf.off_threshold > 0.0)) {
    throw ConfigError("grf channel requires grf.on_threshold and grf.off_threshold");
  }
  return opt;
}

struct ReplaySummary {
  size_t imu_count = 0;
  size_t velocity_count = 0;
  size_t wheel_count = 0;
  size_t kinematics_count = 0;
  size_t contact_count = 0;
  size_t grf_count = 0;
  int clamped_steps = 0;
  double first_stamp = 0.0;
  double last_stamp = 0.0;
  std::vector<std::string> warnings;
};

struct ReplayResult {
  std::vector<metrics::TrajectoryRecord> trajectory;
  ReplaySummary summary;
};

namespace detail {

inline std::vector<Measurement> load_and_merge(const PipelineOptions& opt,
                                               ReplaySummary& summary) {
  std::vector<Measurement> all;
  auto append = [&all](const auto& v) { all.insert(all.end(), v.begin(), v.end()); };

  const auto imu = read_imu(opt.files.at("imu"));
  summary.imu_count = imu.size();
  append(imu);
  if (opt.files.count("wheels")) {
    const auto w = read_wheels(opt.files.at("wheels"), opt.wheel_radius);
    summary.wheel_count = w.size();
    append(w);
  }
  if (opt.files.count("velocity")) {
    const auto v = read_velocity(opt.files.at("velocity"), opt.velocity_sigma);
    summary.velocity_count = v.size();
    append(v);
  }
  if (opt.files.count("kin")) {
    const auto k = read_kinematics(opt.files.at("kin"));
    summary.kinematics_count = k.size();
    append(k);
  }
  if (opt.files.count("contact")) {
    const auto c = read_contacts(opt.files.at("contact"));
    summary.contact_count = c.size();
    append(c);
  }
  if (opt.files.count("grf")) {
    const auto g = read_grf(opt.files.at("grf"));
    summary.grf_count = g.size();
    append(g);
  }

  std::stable_sort(all.begin(), all.end(), [](const Measurement& a, const Measurement& b) {
    const double sa = measurement_stamp(a), sb = measurement_stamp(b);
    if (sa != sb) return sa < sb;
    if (channel_priority(a) != channel_priority(b)) {
      return channel_priority(a) < channel_priority(b);
    }
    return channel_subkey(a) < channel_subkey(b);
  });
  return all;
}

inline Mat3 roll_pitch_from_accel(const std::vector<ImuSample>& imu, const Vec3& gravity,
                                  double window) {
  Vec3 mean = Vec3::Zero();
  int count = 0;
  for (const auto& s : imu) {
    if (s.stamp - imu.front().stamp > window) break;
    mean += s.accel;
    ++count;
  }
  if (count == 0) return Mat3::Identity();
  mean /= count;
  if (mean.norm() < 0.5 * gravity.norm()) return Mat3::Identity();
  const Vec3 n = mean.normalized();  // = R^T (-g)/|g| for a resting body
  const double pitch = std::asin(std::clamp(-n.x(), -1.0, 1.0));
  const double roll = std::atan2(n.y(), n.z());
  return (Eigen::AngleAxisd(pitch, Vec3::UnitY()) * Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

/// Streaming core shared by the single- and two-thread modes. The gyro filter
/// (when enabled) runs upstream: it propagates on base-gyro differences,
/// optionally corrects with the base gyro as a biased source, corrects with
/// wheel-derived yaw rate as an unbiased source, and its de-biased rates
/// replace the masked axes of each IMU sample before dispatch.
class Pipeline {
 public:
  Pipeline(const PipelineOptions& opt, const std::vector<ImuSample>& imu_for_init)
      : opt_(opt), filter_(make_initial_state(opt, imu_for_init), opt.filter),
        grf_source_(opt.grf) {}

  void feed(const Measurement& m) {
    if (const auto* grf = std::get_if<GrfSample>(&m)) {
      if (auto event = grf_source_.update(*grf)) {
        filter_.dispatch(*event);
      }
      return;
    }
    if (opt_.gyro_filter) {
      if (const auto* imu = std::get_if<ImuSample>(&m)) {
        feed_imu_through_gyro_filter(*imu);
        return;
      }
      if (const auto* wheels = std::get_if<WheelRates>(&m)) {
        correct_gyro_filter_from_wheels(*wheels);
        filter_.dispatch(m);
        return;
      }
    }
    filter_.dispatch(m);
    if (std::holds_alternative<ImuSample>(m)) record();
  }

  const InvariantFilter& filter() const { return filter_; }
  std::vector<metrics::TrajectoryRecord>&& take_trajectory() { return std::move(trajectory_); }

 private:
  static EstimatorState make_initial_state(const PipelineOptions& opt,
                                           const std::vector<ImuSample>& imu) {
    EstimatorState s = EstimatorState::Create(2, opt.bias_estimation, opt.init_attitude_var,
                                              opt.init_velocity_var, opt.init_position_var,
                                              opt.init_bias_var);
    Mat3 R;
    if (opt.init_from_accel && !imu.empty()) {
      R = roll_pitch_from_accel(imu, opt.filter.noise.gravity, 0.5);
    } else {
      const Vec3 rpy = opt.init_rpy_deg * M_PI / 180.0;
      R = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
           Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
           Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
              .toRotationMatrix();
    }
    s.X = SEK3(R, {opt.init_velocity, opt.init_position});
    if (!imu.empty()) s.stamp = imu.front().stamp;
    return s;
  }

  void feed_imu_through_gyro_filter(const ImuSample& raw) {
    Mat6 Q = Mat6::Zero();
    Q.topLeftCorner<3, 3>() = opt_.gyro_q_omega * Mat3::Identity();
    Q.bottomRightCorner<3, 3>() = opt_.gyro_q_bias * Mat3::Identity();

    if (!gyro_state_) {
      gyro_state_ = GyroFilterState::Init(raw.omega, raw.stamp);
    } else if (raw.stamp > gyro_state_->stamp) {
      *gyro_state_ = gf_propagate(*gyro_state_, raw.omega, raw.stamp, Q);
    }
    if (opt_.gyro_correct_with_alpha) {
      *gyro_state_ = gf_correct(*gyro_state_, raw.omega, true,
                                opt_.gyro_alpha_sigma * opt_.gyro_alpha_sigma *
                                    Mat3::Identity());
    }
    ImuSample fused = raw;
    for (int i = 0; i < 3; ++i) {
      if (opt_.gyro_axis_mask(i) != 0.0) fused.omega(i) = gyro_state_->omega(i);
    }
    filter_.dispatch(fused);
    record();
  }

  void correct_gyro_filter_from_wheels(const WheelRates& w) {
    if (!gyro_state_ || opt_.track_width <= 0.0) return;
    const double yaw_rate =
        opt_.wheel_radius * (w.qdot_right - w.qdot_left) / opt_.track_width;
    Vec3 beta = gyro_state_->omega;
    Mat3 R = 1e12 * Mat3::Identity();
    for (int i = 0; i < 3; ++i) {
      if (opt_.gyro_axis_mask(i) != 0.0) {
        beta(i) = i == 2 ? yaw_rate : beta(i);
        R(i, i) = opt_.gyro_beta_sigma * opt_.gyro_beta_sigma;
      }
    }
    *gyro_state_ = gf_correct(*gyro_state_, beta, false, R);
  }

  void record() {
    const EstimatorState& s = filter_.state();
    metrics::TrajectoryRecord r;
    r.stamp = s.stamp;
    r.position = s.X.position();
    r.rotation = Eigen::Quaterniond(s.X.rotation());
    r.rotation.normalize();
    r.velocity = s.X.velocity();
    r.has_velocity = true;
    trajectory_.push_back(r);
  }

  const PipelineOptions& opt_;
  InvariantFilter filter_;
  GrfContactSource grf_source_;
  std::optional<GyroFilterState> gyro_state_;
  std::vector<metrics::TrajectoryRecord> trajectory_;
};

// Minimal bounded handoff queue for the two-stage mode.
class MeasurementQueue {
 public:
  void push(Measurement m) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return queue_.size() < capacity_; });
    queue_.push_back(std::move(m));
    lock.unlock();
    not_empty_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    not_empty_.notify_all();
  }

  std::optional<Measurement> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    Measurement m = std::move(queue_.front());
    queue_.pop_front();
    lock.unlock();
    not_full_.notify_one();
    return m;
  }

 private:
  static constexpr size_t capacity_ = 1024;
  std::mutex mutex_;
  std::condition_variable not_full_, not_empty_;
  std::deque<Measurement> queue_;
  bool closed_ = false;
};

}  // namespace detail

/// Runs the configured pipeline over the bound log files and returns the
/// estimated trajectory (one record per IMU sample). Deterministic for fixed
/// inputs in both threading modes.
inline ReplayResult run_replay(const PipelineOptions& opt) {
  ReplayResult result;
  const std::vector<Measurement> merged = detail::load_and_merge(opt, result.summary);

  std::vector<ImuSample> imu_head;
  for (const auto& m : merged) {
    if (const auto* u = std::get_if<ImuSample>(&m)) {
      if (!imu_head.empty() && u->stamp - imu_head.front().stamp > 1.0) break;
      imu_head.push_back(*u);
    }
  }
  if (merged.empty()) {
    result.summary.warnings.push_back("no measurements; trajectory is empty");
    return result;
  }

  detail::Pipeline pipeline(opt, imu_head);
  if (opt.threads == 2) {
    detail::MeasurementQueue queue;
    std::exception_ptr producer_error;
    std::thread producer([&] {
      try {
        for (const auto& m : merged) queue.push(m);
      } catch (...) {
        producer_error = std::current_exception();
      }
      queue.close();
    });
    while (auto m = queue.pop()) pipeline.feed(*m);
    producer.join();
    if (producer_error) std::rethrow_exception(producer_error);
  } else {
    for (const auto& m : merged) pipeline.feed(m);
  }

  result.summary.first_stamp = measurement_stamp(merged.front());
  result.summary.last_stamp = measurement_stamp(merged.back());
  result.summary.clamped_steps = pipeline.filter().clamped_steps();
  result.trajectory = pipeline.take_trajectory();
  if (result.trajectory.empty()) {
    result.summary.warnings.push_back("no IMU samples; trajectory is empty");
  }
  for (const auto& r : result.trajectory) {
    if (!r.position.allFinite() || !r.velocity.allFinite()) {
      throw SingularInnovation("replay: estimate diverged to non-finite values");
    }
  }
  return result;
}

}  // namespace inekf::io
