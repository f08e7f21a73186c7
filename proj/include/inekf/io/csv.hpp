#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "inekf/core/measurement.hpp"
#include "inekf/metrics/trajectory_metrics.hpp"

namespace inekf::io {

struct CsvRow {
  int line = 0;
  std::vector<double> fields;
};

namespace detail {

inline bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc{} && result.ptr == end;
}

}  // namespace detail

/// Reads a comma-separated numeric file: `#` comments and blank lines are
/// skipped, and a single leading header row is tolerated.
inline std::vector<CsvRow> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path);
  }
  std::vector<CsvRow> rows;
  std::string line;
  int line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r\n,") == std::string::npos) continue;

    CsvRow row;
    row.line = line_no;
    std::stringstream ss(line);
    std::string token;
    bool numeric = true;
    while (std::getline(ss, token, ',')) {
      double value;
      if (!detail::parse_double(token, value)) {
        numeric = false;
        break;
      }
      row.fields.push_back(value);
    }
    if (!numeric) {
      if (!seen_data) continue;  // header row
      throw LogParseError(path, line_no, "non-numeric field");
    }
    seen_data = true;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- channel readers ------------------------------------------------------

inline std::vector<ImuSample> read_imu(const std::string& path) {
  std::vector<ImuSample> out;
  for (const auto& row : read_rows(path)) {
    if (row.fields.size() != 7) {
      throw LogParseError(path, row.line, "imu row needs t, wx, wy, wz, ax, ay, az");
    }
    const auto& f = row.fields;
    out.push_back({f[0], Vec3(f[1], f[2], f[3]), Vec3(f[4], f[5], f[6])});
  }
  return out;
}

inline std::vector<WheelRates> read_wheels(const std::string& path, double wheel_radius) {
  std::vector<WheelRates> out;
  for (const auto& row : read_rows(path)) {
    if (row.fields.size() != 3) {
      throw LogParseError(path, row.line, "wheels row needs t, qdot_r, qdot_l");
    }
    out.push_back({row.fields[0], row.fields[1], row.fields[2], wheel_radius});
  }
  return out;
}

inline std::vector<VelocityMeasurement> read_velocity(const std::string& path,
                                                      double sigma) {
  std::vector<VelocityMeasurement> out;
  const double var = std::max(sigma * sigma, 1e-12);
  for (const auto& row : read_rows(path)) {
    if (row.fields.size() != 4) {
      throw LogParseError(path, row.line, "velocity row needs t, vx, vy, vz");
    }
    VelocityMeasurement m;
    m.stamp = row.fields[0];
    m.v_body = Vec3(row.fields[1], row.fields[2], row.fields[3]);
    m.cov = var * Mat3::Identity();
    out.push_back(m);
  }
  return out;
}

/// kin.csv rows: t, leg_id, px, py, pz, J row-major (3n), n, cov row-major
/// (n^2). The joint count is recovered from the field count and checked
/// against the recorded n.
inline std::vector<KinematicsMeasurement> read_kinematics(const std::string& path) {
  std::vector<KinematicsMeasurement> out;
  for (const auto& row : read_rows(path)) {
    const auto& f = row.fields;
    // total = 5 + 3n + 1 + n^2  =>  n^2 + 3n + 6 - total = 0
    const double total = static_cast<double>(f.size());
    const double disc = 9.0 - 4.0 * (6.0 - total);
    const int n = disc >= 0 ? static_cast<int>(std::llround((-3.0 + std::sqrt(disc)) / 2.0)) : -1;
    if (n < 1 || 5 + 3 * n + 1 + n * n != static_cast<int>(f.size())) {
      throw LogParseError(path, row.line, "kin row has inconsistent field count");
    }
    if (std::llround(f[5 + 3 * n]) != n) {
      throw LogParseError(path, row.line, "kin row joint count mismatch");
    }
    KinematicsMeasurement kin;
    kin.stamp = f[0];
    kin.leg_id = static_cast<int>(std::llround(f[1]));
    kin.foot_pos_body = Vec3(f[2], f[3], f[4]);
    kin.jacobian.resize(3, n);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < n; ++c) kin.jacobian(r, c) = f[5 + r * n + c];
    }
    kin.encoder_cov.resize(n, n);
    const int base = 6 + 3 * n;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) kin.encoder_cov(r, c) = f[base + r * n + c];
    }
    out.push_back(std::move(kin));
  }
  return out;
}

inline std::vector<ContactEvent> read_contacts(const std::string& path) {
  std::vector<ContactEvent> out;
  for (const auto& row : read_rows(path)) {
    if (row.fields.size() != 3) {
      throw LogParseError(path, row.line, "contact row needs t, leg_id, flag");
    }
    out.push_back({row.fields[0], static_cast<int>(std::llround(row.fields[1])),
                   row.fields[2] != 0.0});
  }
  return out;
}

inline std::vector<GrfSample> read_grf(const std::string& path) {
  std::vector<GrfSample> out;
  for (const auto& row : read_rows(path)) {
    if (row.fields.size() != 3) {
      throw LogParseError(path, row.line, "grf row needs t, leg_id, f_n");
    }
    out.push_back({row.fields[0], static_cast<int>(std::llround(row.fields[1])),
                   row.fields[2]});
  }
  return out;
}

/// Pose trajectories: t, px, py, pz, qw, qx, qy, qz with optional vx, vy, vz.
inline std::vector<metrics::TrajectoryRecord> read_trajectory(const std::string& path) {
  std::vector<metrics::TrajectoryRecord> out;
  for (const auto& row : read_rows(path)) {
    const auto& f = row.fields;
    if (f.size() != 8 && f.size() != 11) {
      throw LogParseError(path, row.line, "trajectory row needs 8 or 11 fields");
    }
    metrics::TrajectoryRecord r;
    r.stamp = f[0];
    r.position = Vec3(f[1], f[2], f[3]);
    r.rotation = Eigen::Quaterniond(f[4], f[5], f[6], f[7]);
    if (std::abs(r.rotation.norm() - 1.0) > 1e-6) {
      throw LogParseError(path, row.line, "quaternion is not unit norm");
    }
    r.rotation.normalize();
    if (f.size() == 11) {
      r.velocity = Vec3(f[8], f[9], f[10]);
      r.has_velocity = true;
    }
    out.push_back(r);
  }
  return out;
}

// ---- writers ---------------------------------------------------------------

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("cannot write " + path);
  }
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

inline void write_trajectory(const std::string& path,
                             const std::vector<metrics::TrajectoryRecord>& records) {
  auto out = detail::open_out(path);
  out << "t, px, py, pz, qw, qx, qy, qz, vx, vy, vz\n";
  for (const auto& r : records) {
    out << r.stamp << ", " << r.position.x() << ", " << r.position.y() << ", "
        << r.position.z() << ", " << r.rotation.w() << ", " << r.rotation.x() << ", "
        << r.rotation.y() << ", " << r.rotation.z() << ", " << r.velocity.x() << ", "
        << r.velocity.y() << ", " << r.velocity.z() << "\n";
  }
}

inline void write_imu(const std::string& path, const std::vector<ImuSample>& samples) {
  auto out = detail::open_out(path);
  out << "t, wx, wy, wz, ax, ay, az\n";
  for (const auto& s : samples) {
    out << s.stamp << ", " << s.omega.x() << ", " << s.omega.y() << ", " << s.omega.z()
        << ", " << s.accel.x() << ", " << s.accel.y() << ", " << s.accel.z() << "\n";
  }
}

inline void write_wheels(const std::string& path, const std::vector<WheelRates>& rates) {
  auto out = detail::open_out(path);
  out << "t, qdot_r, qdot_l\n";
  for (const auto& w : rates) {
    out << w.stamp << ", " << w.qdot_right << ", " << w.qdot_left << "\n";
  }
}

inline void write_velocity(const std::string& path,
                           const std::vector<VelocityMeasurement>& ms) {
  auto out = detail::open_out(path);
  out << "t, vx, vy, vz\n";
  for (const auto& m : ms) {
    out << m.stamp << ", " << m.v_body.x() << ", " << m.v_body.y() << ", "
        << m.v_body.z() << "\n";
  }
}

inline void write_kinematics(const std::string& path,
                             const std::vector<KinematicsMeasurement>& kins) {
  auto out = detail::open_out(path);
  out << "# t, leg_id, px, py, pz, jacobian row-major 3xn, n, encoder_cov row-major nxn\n";
  for (const auto& k : kins) {
    const int n = static_cast<int>(k.jacobian.cols());
    out << k.stamp << ", " << k.leg_id << ", " << k.foot_pos_body.x() << ", "
        << k.foot_pos_body.y() << ", " << k.foot_pos_body.z();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < n; ++c) out << ", " << k.jacobian(r, c);
    }
    out << ", " << n;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) out << ", " << k.encoder_cov(r, c);
    }
    out << "\n";
  }
}

inline void write_contacts(const std::string& path, const std::vector<ContactEvent>& cs) {
  auto out = detail::open_out(path);
  out << "t, leg_id, flag\n";
  for (const auto& c : cs) {
    out << c.stamp << ", " << c.leg_id << ", " << (c.in_contact ? 1 : 0) << "\n";
  }
}

inline void write_groundtruth(const std::string& path,
                              const std::vector<metrics::TrajectoryRecord>& records) {
  auto out = detail::open_out(path);
  out << "t, px, py, pz, qw, qx, qy, qz\n";
  for (const auto& r : records) {
    out << r.stamp << ", " << r.position.x() << ", " << r.position.y() << ", "
        << r.position.z() << ", " << r.rotation.w() << ", " << r.rotation.x() << ", "
        << r.rotation.y() << ", " << r.rotation.z() << "\n";
  }
}

}  // namespace inekf::io
