#pragma once

#include <variant>

#include "inekf/contact/grf_detector.hpp"
#include "inekf/corrections/contact.hpp"
#include "inekf/corrections/velocity.hpp"
#include "inekf/imu/propagation.hpp"

namespace inekf {

using Measurement = std::variant<ImuSample, VelocityMeasurement, WheelRates,
                                 KinematicsMeasurement, ContactEvent, GrfSample>;

inline double measurement_stamp(const Measurement& m) {
  return std::visit([](const auto& v) { return v.stamp; }, m);
}

/// Merge tie-break order at equal stamps: IMU first, then velocity-like
/// channels, then kinematics, then contact-like channels.
inline int channel_priority(const Measurement& m) {
  struct Visitor {
    int operator()(const ImuSample&) const { return 0; }
    int operator()(const VelocityMeasurement&) const { return 1; }
    int operator()(const WheelRates&) const { return 1; }
    int operator()(const KinematicsMeasurement&) const { return 2; }
    int operator()(const ContactEvent&) const { return 3; }
    int operator()(const GrfSample&) const { return 3; }
  };
  return std::visit(Visitor{}, m);
}

/// Secondary tie-break key so multi-leg rows at one stamp stay deterministic.
inline int channel_subkey(const Measurement& m) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, KinematicsMeasurement> ||
                      std::is_same_v<T, ContactEvent> || std::is_same_v<T, GrfSample>) {
          return v.leg_id;
        } else {
          return 0;
        }
      },
      m);
}

}  // namespace inekf
