#pragma once

#include <cmath>
#include <map>
#include <optional>

#include "inekf/corrections/contact.hpp"

namespace inekf {

struct GrfSample {
  double stamp = 0.0;
  int leg_id = 0;
  double grf_normal = 0.0;  // N, estimated normal ground-reaction force
};

/// GRF thresholding parameters. Two thresholds plus a dwell time suppress the
/// touchdown bounce chatter a single fixed threshold lets through.
struct ThresholdConfig {
  double cutoff_hz = 20.0;
  double on_threshold = 0.0;   // N, rising edge
  double off_threshold = 0.0;  // N, falling edge, <= on_threshold
  double min_dwell = 0.01;     // s a crossing must be sustained
};

/// First-order IIR low-pass with unit DC gain, initialized at zero.
class LowPassFilter {
 public:
  explicit LowPassFilter(double cutoff_hz) : tau_(1.0 / (2.0 * M_PI * cutoff_hz)) {
    if (!(cutoff_hz > 0.0)) {
      throw ConfigError("LowPassFilter: cutoff must be positive");
    }
  }

  double filter(double stamp, double x) {
    if (has_stamp_) {
      const double dt = stamp - last_stamp_;
      if (dt > 0.0) {
        const double alpha = dt / (tau_ + dt);
        y_ += alpha * (x - y_);
      }
    } else {
      const double alpha = 1.0 / (tau_ * assumed_rate_ + 1.0);
      y_ += alpha * (x - y_);
      has_stamp_ = true;
    }
    last_stamp_ = stamp;
    return y_;
  }

  double value() const { return y_; }

 private:
  static constexpr double assumed_rate_ = 1000.0;  // first-sample dt fallback
  double tau_;
  double y_ = 0.0;
  double last_stamp_ = 0.0;
  bool has_stamp_ = false;
};

/// Stream detector for one leg: low-pass the GRF, then hysteresis thresholds
/// with a dwell requirement. Emitted events strictly alternate.
class GrfContactDetector {
 public:
  explicit GrfContactDetector(const ThresholdConfig& cfg)
      : cfg_(cfg), lowpass_(cfg.cutoff_hz) {
    if (cfg.off_threshold > cfg.on_threshold) {
      throw ConfigError("GrfContactDetector: off_threshold must be <= on_threshold");
    }
  }

  std::optional<ContactEvent> update(const GrfSample& s) {
    const double f = lowpass_.filter(s.stamp, s.grf_normal);
    const bool crossing = in_contact_ ? (f < cfg_.off_threshold) : (f > cfg_.on_threshold);
    if (!crossing) {
      candidate_since_.reset();
      return std::nullopt;
    }
    if (!candidate_since_) candidate_since_ = s.stamp;
    if (s.stamp - *candidate_since_ < cfg_.min_dwell) return std::nullopt;

    in_contact_ = !in_contact_;
    candidate_since_.reset();
    return ContactEvent{s.stamp, s.leg_id, in_contact_};
  }

  bool in_contact() const { return in_contact_; }
  double filtered() const { return lowpass_.value(); }

 private:
  ThresholdConfig cfg_;
  LowPassFilter lowpass_;
  bool in_contact_ = false;
  std::optional<double> candidate_since_;
};

/// Routes mixed-leg GRF streams to per-leg detectors.
class GrfContactSource {
 public:
  explicit GrfContactSource(const ThresholdConfig& cfg) : cfg_(cfg) {}

  std::optional<ContactEvent> update(const GrfSample& s) {
    auto it = detectors_.find(s.leg_id);
    if (it == detectors_.end()) {
      it = detectors_.emplace(s.leg_id, GrfContactDetector(cfg_)).first;
    }
    return it->second.update(s);
  }

 private:
  ThresholdConfig cfg_;
  std::map<int, GrfContactDetector> detectors_;
};

}  // namespace inekf
