#pragma once

#include <map>
#include <optional>

#include "inekf/core/measurement.hpp"
#include "inekf/core/update.hpp"

namespace inekf {

/// Channel gates and timing policy of the measurement pipeline.
struct FilterConfig {
  ImuNoiseParams noise;

  double wheel_forward_sigma = 0.05;   // m/s
  double wheel_lateral_sigma = 0.05;   // m/s, nonholonomic pseudo-measurement
  double wheel_vertical_sigma = 0.05;  // m/s

  double out_of_order_slack = 2e-3;    // s, older measurements are rejected
  double kinematics_staleness = 20e-3; // s, freshness required for augmentation
  double dt_min = 1e-5;                // s, IMU step clamp
  double dt_max = 0.1;

  bool accept_velocity = true;
  bool accept_kinematics = true;
  bool accept_contacts = true;
};

/// Single-writer measurement-dispatch state machine around the invariant
/// filter: IMU samples propagate, velocity and kinematics build corrections,
/// contact flags drive slot augmentation and marginalization. Measurements
/// must arrive in non-decreasing stamp order up to the configured slack;
/// late arrivals within the slack are applied as if current.
class InvariantFilter {
 public:
  InvariantFilter(EstimatorState initial, FilterConfig config)
      : s_(std::move(initial)), cfg_(std::move(config)) {}

  const EstimatorState& state() const { return s_; }
  const FilterConfig& config() const { return cfg_; }
  int clamped_steps() const { return clamped_steps_; }

  void dispatch(const Measurement& m) {
    const double stamp = measurement_stamp(m);
    if (stamp < s_.stamp - cfg_.out_of_order_slack) {
      throw OutOfOrderMeasurement("dispatch: measurement older than state by more than slack");
    }
    std::visit([&](const auto& v) { handle(v); }, m);
    s_.stamp = std::max(s_.stamp, stamp);
  }

 private:
  void handle(const ImuSample& u) {
    if (last_imu_stamp_) {
      double dt = u.stamp - *last_imu_stamp_;
      if (dt < cfg_.dt_min || dt > cfg_.dt_max) {
        dt = std::clamp(dt, cfg_.dt_min, cfg_.dt_max);
        ++clamped_steps_;
      }
      s_ = propagate(s_, u, dt, cfg_.noise);
      s_.stamp = u.stamp;
    }
    last_imu_stamp_ = u.stamp;
  }

  void handle(const VelocityMeasurement& m) {
    if (!cfg_.accept_velocity) {
      throw UnknownChannel("dispatch: velocity channel is not configured");
    }
    s_ = ri_update(s_, velocity_observation(s_, m));
  }

  void handle(const WheelRates& w) {
    if (!cfg_.accept_velocity) {
      throw UnknownChannel("dispatch: wheel channel is not configured");
    }
    s_ = ri_update(s_, velocity_observation(
                           s_, wheel_pseudo_velocity(w, cfg_.wheel_lateral_sigma,
                                                     cfg_.wheel_vertical_sigma,
                                                     cfg_.wheel_forward_sigma)));
  }

  void handle(const KinematicsMeasurement& kin) {
    if (!cfg_.accept_kinematics) {
      throw UnknownChannel("dispatch: kinematics channel is not configured");
    }
    last_kin_[kin.leg_id] = kin;
    if (!leg_contact_[kin.leg_id]) return;
    if (s_.contact_slots.count(kin.leg_id)) {
      s_ = ri_update(s_, contact_observation(s_, kin));
    } else {
      s_ = contact_augment(s_, kin);  // contact arrived before usable kinematics
    }
  }

  void handle(const ContactEvent& e) {
    if (!cfg_.accept_contacts) {
      throw UnknownChannel("dispatch: contact channel is not configured");
    }
    const bool was = leg_contact_[e.leg_id];
    if (was == e.in_contact) return;
    leg_contact_[e.leg_id] = e.in_contact;
    if (e.in_contact) {
      const auto kin = last_kin_.find(e.leg_id);
      if (kin != last_kin_.end() &&
          e.stamp - kin->second.stamp <= cfg_.kinematics_staleness) {
        s_ = contact_augment(s_, kin->second);
      }
      // Stale or missing kinematics: augmentation happens on the next sample.
    } else if (s_.contact_slots.count(e.leg_id)) {
      s_ = contact_marginalize(s_, e.leg_id);
    }
  }

  void handle(const GrfSample&) {
    // Raw forces are converted upstream by the GRF contact source; reaching
    // the filter directly means the pipeline is misconfigured.
    throw UnknownChannel("dispatch: raw GRF samples must pass a contact source");
  }

  EstimatorState s_;
  FilterConfig cfg_;
  std::optional<double> last_imu_stamp_;
  std::map<int, KinematicsMeasurement> last_kin_;
  std::map<int, bool> leg_contact_;
  int clamped_steps_ = 0;
};

}  // namespace inekf
