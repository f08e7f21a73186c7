#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "inekf/contact/grf_detector.hpp"
#include "inekf/gyro/gyro_filter.hpp"
#include "test_support.hpp"

using namespace inekf;
using test_support::Rng;

TEST_CASE("low-pass filter converges to a constant input") {
  const double cutoff = 5.0;
  const double tau = 1.0 / (2.0 * M_PI * cutoff);
  LowPassFilter lp(cutoff);
  const double dt = 1e-3;
  double y = 0.0;
  for (double t = 0.0; t < 5.0 * tau; t += dt) y = lp.filter(t, 42.0);
  REQUIRE(std::abs(y - 42.0) < 0.01 * 42.0);
}

TEST_CASE("low-pass filter of zero input stays zero") {
  LowPassFilter lp(10.0);
  for (int i = 0; i < 1000; ++i) REQUIRE(lp.filter(i * 1e-3, 0.0) == 0.0);
}

TEST_CASE("unit step response reaches 1 - 1/e after one time constant") {
  const double cutoff = 5.0;
  const double tau = 1.0 / (2.0 * M_PI * cutoff);
  LowPassFilter lp(cutoff);
  const double dt = 1e-4;  // sampling far above the cutoff
  double t = 0.0;
  for (; t < 1.0; t += dt) lp.filter(t, 0.0);
  const double t_step = t;
  double y = 0.0;
  for (; t < t_step + tau + dt / 2; t += dt) y = lp.filter(t, 1.0);
  REQUIRE(std::abs(y - (1.0 - std::exp(-1.0))) < 0.02);
}

TEST_CASE("zero force never produces contact events") {
  ThresholdConfig cfg{20.0, 60.0, 40.0, 0.01};
  GrfContactDetector det(cfg);
  for (int i = 0; i < 5000; ++i) {
    REQUIRE(!det.update({i * 1e-3, 0, 0.0}).has_value());
  }
}

TEST_CASE("clean square wave produces one bounded-delay event per edge") {
  const double cutoff = 20.0;
  const double tau = 1.0 / (2.0 * M_PI * cutoff);
  ThresholdConfig cfg{cutoff, 60.0, 40.0, 0.01};
  GrfContactDetector det(cfg);

  const double dt = 1e-3;
  const double period = 1.0;  // 0.5 s on, 0.5 s off
  std::vector<ContactEvent> events;
  std::vector<double> edges;
  for (int i = 0; i < 6000; ++i) {
    const double t = i * dt;
    const double phase = std::fmod(t, period);
    const double grf = (phase < 0.5) ? 100.0 : 0.0;
    if (i > 0) {
      const double prev_phase = std::fmod((i - 1) * dt, period);
      if ((prev_phase < 0.5) != (phase < 0.5)) edges.push_back(t);
      if (i == 1) edges.push_back(0.0);  // initial rising edge at t = 0
    }
    if (auto e = det.update({t, 0, grf})) events.push_back(*e);
  }
  std::sort(edges.begin(), edges.end());
  REQUIRE(events.size() == edges.size());

  // Rising lag: 100(1 - e^(-t/tau)) crosses 60 at tau ln(2.5); falling is
  // symmetric. Allow the dwell plus two sample periods on top.
  const double lag_bound = tau * std::log(2.5) + cfg.min_dwell + 2 * dt + 1e-9;
  for (size_t i = 0; i < events.size(); ++i) {
    REQUIRE(events[i].in_contact == (i % 2 == 0));
    REQUIRE(events[i].stamp - edges[i] >= 0.0);
    REQUIRE(events[i].stamp - edges[i] <= lag_bound);
  }
}

TEST_CASE("hysteresis suppresses chattering on a noisy square wave") {
  Rng rng(90);
  std::uniform_real_distribution<double> noise(-15.0, 15.0);
  ThresholdConfig cfg{20.0, 60.0, 40.0, 0.01};
  GrfContactDetector det(cfg);

  int events = 0;
  int true_edges = 1;  // rising at t = 0
  const double dt = 1e-3;
  std::optional<bool> last_state;
  for (int i = 0; i < 8000; ++i) {
    const double t = i * dt;
    const bool high = std::fmod(t, 1.0) < 0.5;
    if (i > 0 && (std::fmod((i - 1) * dt, 1.0) < 0.5) != high) ++true_edges;
    const double grf = (high ? 100.0 : 0.0) + noise(rng);
    if (auto e = det.update({t, 0, grf})) {
      ++events;
      if (last_state) REQUIRE(*last_state != e->in_contact);  // strict alternation
      last_state = e->in_contact;
    }
  }
  REQUIRE(events == true_edges);
}

TEST_CASE("detector output is deterministic") {
  Rng rng(91);
  std::normal_distribution<double> noise(0.0, 8.0);
  std::vector<GrfSample> stream;
  for (int i = 0; i < 4000; ++i) {
    const double t = i * 1e-3;
    stream.push_back({t, 2, (std::fmod(t, 0.8) < 0.4 ? 90.0 : 5.0) + noise(rng)});
  }
  auto run = [&] {
    GrfContactDetector det(ThresholdConfig{15.0, 55.0, 35.0, 0.008});
    std::vector<ContactEvent> out;
    for (const auto& s : stream) {
      if (auto e = det.update(s)) out.push_back(*e);
    }
    return out;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].stamp == b[i].stamp);
    REQUIRE(a[i].in_contact == b[i].in_contact);
  }
}

TEST_CASE("gyro filter propagation follows the source differences") {
  GyroFilterState s = GyroFilterState::Init(Vec3(0.1, 0, 0), 0.0);
  const Mat6 Q = 1e-5 * Mat6::Identity();

  SECTION("constant source leaves omega fixed while P grows") {
    const GyroFilterState next = gf_propagate(s, Vec3(0.1, 0, 0), 0.01, Q);
    REQUIRE((next.omega - s.omega).norm() == 0.0);
    REQUIRE((next.P - (s.P + Q)).norm() == 0.0);
  }
  SECTION("a step in the source steps omega") {
    const GyroFilterState next = gf_propagate(s, Vec3(0.2, 0, 0), 0.01, Q);
    REQUIRE((next.omega - Vec3(0.2, 0, 0)).norm() < 1e-15);
  }
  SECTION("zero process noise keeps P constant") {
    GyroFilterState next = s;
    for (int i = 1; i <= 100; ++i) {
      next = gf_propagate(next, Vec3(0.1, 0, 0), i * 0.01, Mat6::Zero());
    }
    REQUIRE((next.P - s.P).norm() == 0.0);
  }
  SECTION("non-increasing stamps are refused") {
    REQUIRE_THROWS_AS(gf_propagate(s, Vec3::Zero(), 0.0, Q), NonMonotonicStamp);
  }
}

TEST_CASE("gyro filter correction identities") {
  GyroFilterState s = GyroFilterState::Init(Vec3(0.1, -0.05, 0.2), 0.0);

  SECTION("consistent unbiased measurement leaves the mean fixed") {
    const GyroFilterState next = gf_correct(s, s.omega, false, 1e-4 * Mat3::Identity());
    REQUIRE((next.omega - s.omega).norm() < 1e-15);
    REQUIRE((next.bias - s.bias).norm() < 1e-15);
  }
  SECTION("infinite measurement noise gives a vanishing update") {
    const GyroFilterState next =
        gf_correct(s, Vec3(5.0, 5.0, 5.0), false, 1e12 * Mat3::Identity());
    REQUIRE((next.omega - s.omega).norm() < 1e-9);
    REQUIRE((next.bias - s.bias).norm() < 1e-9);
  }
  SECTION("omega covariance never grows through a correction") {
    const GyroFilterState next = gf_correct(s, Vec3(0.2, 0, 0), false, 1e-3 * Mat3::Identity());
    REQUIRE(next.P.topLeftCorner<3, 3>().trace() <= s.P.topLeftCorner<3, 3>().trace());
    REQUIRE((next.P - next.P.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat6> es(next.P);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("constant source bias is recovered, matching a scalar oracle") {
  // Source alpha carries a 0.02 rad/s bias and drives the propagation plus a
  // biased correction; source beta is unbiased. A hand-rolled 2-state scalar
  // Kalman filter runs the identical schedule as the oracle for axis x.
  const double true_omega = 0.1;
  const double alpha_bias = 0.02;
  const double r_alpha = 1e-4, r_beta = 1e-4;
  const double q_omega = 1e-5, q_bias = 1e-6;

  Mat6 Q = Mat6::Zero();
  Q.topLeftCorner<3, 3>() = q_omega * Mat3::Identity();
  Q.bottomRightCorner<3, 3>() = q_bias * Mat3::Identity();

  const Vec3 alpha(true_omega + alpha_bias, alpha_bias, alpha_bias);
  const Vec3 beta(true_omega, 0.0, 0.0);

  GyroFilterState s = GyroFilterState::Init(alpha, 0.0);

  // Scalar oracle state for axis x.
  double x_w = alpha(0), x_b = 0.0;
  Eigen::Matrix2d P;
  P << 1e-2, 0, 0, 1e-2;
  Eigen::Matrix2d Qs;
  Qs << q_omega, 0, 0, q_bias;

  for (int i = 1; i <= 500; ++i) {
    s = gf_propagate(s, alpha, i * 0.005, Q);
    s = gf_correct(s, alpha, true, r_alpha * Mat3::Identity());
    s = gf_correct(s, beta, false, r_beta * Mat3::Identity());

    P += Qs;
    for (int pass = 0; pass < 2; ++pass) {
      const bool biased = pass == 0;
      const double meas = biased ? alpha(0) : beta(0);
      const double r = biased ? r_alpha : r_beta;
      Eigen::RowVector2d h;
      h << 1.0, (biased ? 1.0 : 0.0);
      const double sv = (h * P * h.transpose())(0) + r;
      const Eigen::Vector2d gain = P * h.transpose() / sv;
      const double innov = meas - (h * Eigen::Vector2d(x_w, x_b))(0);
      x_w += gain(0) * innov;
      x_b += gain(1) * innov;
      const Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity() - gain * h;
      P = ikh * P * ikh.transpose() + gain * r * gain.transpose();
    }
  }

  REQUIRE(s.omega(0) == Catch::Approx(x_w).margin(1e-12));
  REQUIRE(s.bias(0) == Catch::Approx(x_b).margin(1e-12));
  REQUIRE(std::abs(s.omega(0) - true_omega) < 1e-3);
  REQUIRE(std::abs(s.bias(0) - alpha_bias) < 2e-3);
}
