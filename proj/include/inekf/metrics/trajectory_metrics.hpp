#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Geometry>

#include "inekf/errors.hpp"
#include "inekf/lie/so3.hpp"

namespace inekf::metrics {

/// Serialized pose sample. The quaternion is storage only; all math converts
/// back to the rotation matrix.
struct TrajectoryRecord {
  double stamp = 0.0;
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 velocity = Vec3::Zero();
  bool has_velocity = false;
};

struct RpeResult {
  double translational = 0.0;   // m per m of traveled distance
  double rotational_deg = 0.0;  // deg per m
  int pairs = 0;
};

namespace detail {

inline TrajectoryRecord interpolate(const TrajectoryRecord& a, const TrajectoryRecord& b,
                                    double stamp) {
  const double span = b.stamp - a.stamp;
  const double u = span > 0.0 ? (stamp - a.stamp) / span : 0.0;
  TrajectoryRecord out;
  out.stamp = stamp;
  out.position = (1.0 - u) * a.position + u * b.position;
  out.rotation = a.rotation.slerp(u, b.rotation);
  out.velocity = (1.0 - u) * a.velocity + u * b.velocity;
  out.has_velocity = a.has_velocity && b.has_velocity;
  return out;
}

/// Resample est at the reference stamps (skipping stamps outside est's span).
inline std::vector<std::pair<TrajectoryRecord, TrajectoryRecord>> align(
    const std::vector<TrajectoryRecord>& est, const std::vector<TrajectoryRecord>& ref) {
  std::vector<std::pair<TrajectoryRecord, TrajectoryRecord>> out;
  if (est.empty() || ref.empty()) return out;
  size_t j = 0;
  for (const auto& r : ref) {
    if (r.stamp < est.front().stamp || r.stamp > est.back().stamp) continue;
    while (j + 1 < est.size() && est[j + 1].stamp < r.stamp) ++j;
    const size_t jn = std::min(j + 1, est.size() - 1);
    out.emplace_back(interpolate(est[j], est[jn], r.stamp), r);
  }
  return out;
}

inline double geodesic_angle(const Eigen::Quaterniond& qa, const Eigen::Quaterniond& qb) {
  return rotation_angle(qa.toRotationMatrix().transpose() * qb.toRotationMatrix());
}

}  // namespace detail

inline double arc_length(const std::vector<TrajectoryRecord>& t) {
  double len = 0.0;
  for (size_t i = 1; i < t.size(); ++i) len += (t[i].position - t[i - 1].position).norm();
  return len;
}

/// RMSE of the relative pose error over all pose pairs separated by delta_m
/// of traveled distance along the reference, reported as drift per meter.
/// The estimate is linearly resampled at the reference stamps first.
inline RpeResult rpe(const std::vector<TrajectoryRecord>& est,
                     const std::vector<TrajectoryRecord>& ref, double delta_m) {
  if (!(delta_m > 0.0)) {
    throw ConfigError("rpe: delta must be positive");
  }
  const auto pairs = detail::align(est, ref);
  if (pairs.size() < 2) {
    throw InsufficientOverlap("rpe: trajectories share no usable time range");
  }

  std::vector<double> s(pairs.size(), 0.0);
  for (size_t i = 1; i < pairs.size(); ++i) {
    s[i] = s[i - 1] + (pairs[i].second.position - pairs[i - 1].second.position).norm();
  }
  if (s.back() < delta_m) {
    throw InsufficientOverlap("rpe: reference is shorter than delta");
  }

  double sum_t2 = 0.0, sum_r2 = 0.0;
  int count = 0;
  size_t j = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (j < i + 1) j = i + 1;
    while (j < pairs.size() && s[j] - s[i] < delta_m) ++j;
    if (j >= pairs.size()) break;
    const double separation = s[j] - s[i];
    if (separation <= 0.0) continue;

    const auto& [ei, ri] = pairs[i];
    const auto& [ej, rj] = pairs[j];
    const Mat3 Ri = ri.rotation.toRotationMatrix();
    const Mat3 Rei = ei.rotation.toRotationMatrix();

    // Relative motions over the segment, then their discrepancy.
    const Mat3 dR_ref = Ri.transpose() * rj.rotation.toRotationMatrix();
    const Vec3 dp_ref = Ri.transpose() * (rj.position - ri.position);
    const Mat3 dR_est = Rei.transpose() * ej.rotation.toRotationMatrix();
    const Vec3 dp_est = Rei.transpose() * (ej.position - ei.position);

    const Mat3 err_R = dR_ref.transpose() * dR_est;
    const Vec3 err_p = dR_ref.transpose() * (dp_est - dp_ref);

    sum_t2 += err_p.squaredNorm() / (separation * separation);
    const double ang = rotation_angle(err_R) * 180.0 / M_PI;
    sum_r2 += (ang / separation) * (ang / separation);
    ++count;
  }
  if (count == 0) {
    throw InsufficientOverlap("rpe: no pose pairs at the requested delta");
  }
  RpeResult out;
  out.translational = std::sqrt(sum_t2 / count);
  out.rotational_deg = std::sqrt(sum_r2 / count);
  out.pairs = count;
  return out;
}

struct DriftResult {
  double final_drift_m = 0.0;
  double percent = 0.0;  // of the reference path length
};

/// Euclidean distance between the terminal positions, also as a percentage
/// of the reference arc length.
inline DriftResult final_drift(const std::vector<TrajectoryRecord>& est,
                               const std::vector<TrajectoryRecord>& ref) {
  if (est.empty() || ref.empty()) {
    throw InsufficientOverlap("final_drift: empty trajectory");
  }
  DriftResult out;
  out.final_drift_m = (est.back().position - ref.back().position).norm();
  const double len = arc_length(ref);
  out.percent = len > 0.0 ? 100.0 * out.final_drift_m / len : 0.0;
  return out;
}

}  // namespace inekf::metrics
