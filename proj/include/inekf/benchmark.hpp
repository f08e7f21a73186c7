#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "inekf/core/filter.hpp"
#include "inekf/gyro/gyro_filter.hpp"

namespace inekf::bench {

struct BenchRow {
  std::string name;
  double mean_us = 0.0;
  double std_us = 0.0;
  long iterations = 0;
};

namespace detail {

template <typename F>
BenchRow measure(const std::string& name, long iterations, long warmup, F&& step) {
  using clock = std::chrono::steady_clock;
  for (long i = 0; i < warmup; ++i) step();
  std::vector<double> us;
  us.reserve(static_cast<size_t>(iterations));
  for (long i = 0; i < iterations; ++i) {
    const auto t0 = clock::now();
    step();
    const auto t1 = clock::now();
    us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  double mean = 0.0;
  for (const double v : us) mean += v;
  mean /= static_cast<double>(us.size());
  double var = 0.0;
  for (const double v : us) var += (v - mean) * (v - mean);
  var /= static_cast<double>(us.size());
  return {name, mean, std::sqrt(var), iterations};
}

inline EstimatorState bench_state(int slots, bool with_bias) {
  EstimatorState s = EstimatorState::Create(slots, with_bias, 1e-2, 1e-2, 1e-2);
  s.X.set_column(0, Vec3(0.8, 0.1, 0.0));
  s.X.set_column(1, Vec3(3.0, -1.0, 0.2));
  for (int i = 2; i < slots; ++i) {
    s.X.set_column(i, Vec3(3.1, -1.0, -0.1 * i));
    s.contact_slots[i - 2] = i;
  }
  return s;
}

}  // namespace detail

/// Per-step latency of every filter operation, mirroring the runtime table
/// layout: four estimator rows and two gyro-filter rows.
inline std::vector<BenchRow> run_all(long iterations = 100000, long warmup = 1000) {
  std::vector<BenchRow> rows;
  const ImuNoiseParams noise;
  const ImuSample u{0.0, Vec3(0.01, -0.02, 0.3), Vec3(0.2, 0.1, 9.81)};
  const double dt = 1.0 / 400.0;

  {
    EstimatorState s = detail::bench_state(2, true);
    rows.push_back(detail::measure("propagation", iterations, warmup,
                                   [&] { s = propagate(s, u, dt, noise); }));
  }
  {
    EstimatorState s = detail::bench_state(3, true);
    rows.push_back(detail::measure("propagation with contact", iterations, warmup,
                                   [&] { s = propagate(s, u, dt, noise); }));
  }
  {
    EstimatorState s = detail::bench_state(2, true);
    VelocityMeasurement m;
    m.v_body = Vec3(0.8, 0.0, 0.0);
    m.cov = 1e-3 * Mat3::Identity();
    rows.push_back(detail::measure("velocity correction", iterations, warmup, [&] {
      m.v_body = s.X.rotation().transpose() * s.X.velocity();
      s = ri_update(s, velocity_observation(s, m));
    }));
  }
  {
    EstimatorState s = detail::bench_state(3, true);
    KinematicsMeasurement kin;
    kin.leg_id = 0;
    kin.jacobian = Eigen::MatrixXd::Identity(3, 3);
    kin.encoder_cov = 1e-5 * Eigen::MatrixXd::Identity(3, 3);
    rows.push_back(detail::measure("contact correction", iterations, warmup, [&] {
      kin.foot_pos_body = s.X.rotation().transpose() * (s.X.column(2) - s.X.position());
      s = ri_update(s, contact_observation(s, kin));
    }));
  }
  {
    GyroFilterState g = GyroFilterState::Init(Vec3(0.1, 0, 0.2), 0.0);
    Mat6 Q = 1e-6 * Mat6::Identity();
    double t = 0.0;
    rows.push_back(detail::measure("gyro filter propagation", iterations, warmup, [&] {
      t += dt;
      g = gf_propagate(g, Vec3(0.1, 0, 0.2), t, Q);
    }));
  }
  {
    GyroFilterState g = GyroFilterState::Init(Vec3(0.1, 0, 0.2), 0.0);
    const Mat3 R = 1e-4 * Mat3::Identity();
    rows.push_back(detail::measure("gyro filter correction", iterations, warmup,
                                   [&] { g = gf_correct(g, Vec3(0.1, 0, 0.2), false, R); }));
  }
  return rows;
}

}  // namespace inekf::bench
