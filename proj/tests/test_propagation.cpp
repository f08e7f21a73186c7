#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "inekf/imu/propagation.hpp"
#include "test_support.hpp"

using namespace inekf;
using test_support::Rng;

namespace {

// Deterministic continuous dynamics f_u(X) in the dense embedding, written
// from its defining block layout. Used by the RK4 and finite-difference
// oracles below; independent of the propagation code under test.
Eigen::MatrixXd continuous_f(const Eigen::MatrixXd& X, const Vec3& omega,
                             const Vec3& accel, const Vec3& g) {
  const int n = static_cast<int>(X.rows());
  const Mat3 R = X.topLeftCorner<3, 3>();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  f.topLeftCorner<3, 3>() = R * skew(omega);
  f.block<3, 1>(0, 3) = R * accel + g;
  f.block<3, 1>(0, 4) = X.block<3, 1>(0, 3);  // d/dt p = v
  return f;
}

using InputFn = std::function<void(double, Vec3&, Vec3&)>;

// Classic RK4 on the embedded matrix ODE dX/dt = f_u(X). The rotation block
// is re-projected only by the final comparison tolerances, not here.
Eigen::MatrixXd rk4_flow(Eigen::MatrixXd X, const InputFn& input, const Vec3& g,
                         double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  Vec3 w, a;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    input(t, w, a);
    const Eigen::MatrixXd k1 = continuous_f(X, w, a, g);
    input(t + 0.5 * h, w, a);
    const Eigen::MatrixXd k2 = continuous_f(X + 0.5 * h * k1, w, a, g);
    const Eigen::MatrixXd k3 = continuous_f(X + 0.5 * h * k2, w, a, g);
    input(t + h, w, a);
    const Eigen::MatrixXd k4 = continuous_f(X + h * k3, w, a, g);
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return X;
}

EstimatorState make_state(int slots, bool with_bias) {
  return EstimatorState::Create(slots, with_bias, 1e-4, 1e-4, 1e-4);
}

}  // namespace

TEST_CASE("a resting IMU measuring -g leaves the state unchanged") {
  const ImuNoiseParams noise;
  EstimatorState s = make_state(2, false);
  ImuSample u;
  u.omega = Vec3::Zero();
  u.accel = -noise.gravity;  // accelerometer reads +9.80665 z at rest
  const EstimatorState out = propagate_mean(s, u, 0.01, noise.gravity);
  REQUIRE((out.X.matrix() - s.X.matrix()).norm() < 1e-15);
  REQUIRE(out.stamp == Catch::Approx(0.01));
}

TEST_CASE("ballistic flight follows constant-acceleration kinematics") {
  const Vec3 g(0, 0, -9.81);
  EstimatorState s = make_state(2, false);
  s.X.set_column(0, Vec3(1, 0, 0));
  ImuSample u;  // free fall: no rotation, no specific force
  const EstimatorState out = propagate_mean(s, u, 0.1, g);
  REQUIRE((out.X.velocity() - Vec3(1, 0, -0.981)).norm() < 1e-12);
  REQUIRE((out.X.position() - Vec3(0.1, 0, -0.04905)).norm() < 1e-12);
}

TEST_CASE("a pure yaw spin matches RK4 integration of the continuous model") {
  const Vec3 g(0, 0, -9.81);
  EstimatorState s = make_state(2, false);
  const ImuSample u{0.0, Vec3(0, 0, 1), Vec3(0.3, -0.1, 9.81)};
  const EstimatorState out = propagate_mean(s, u, 0.5, g);

  const Mat3 expected_R = Eigen::AngleAxisd(0.5, Vec3::UnitZ()).toRotationMatrix();
  REQUIRE((out.X.rotation() - expected_R).norm() < 1e-12);

  auto input = [&](double, Vec3& w, Vec3& a) {
    w = u.omega;
    a = u.accel;
  };
  const Eigen::MatrixXd oracle =
      rk4_flow(s.X.matrix(), input, g, 0.0, 0.5, 2000);
  REQUIRE((out.X.matrix() - oracle).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("propagation keeps contact columns and biases fixed") {
  Rng rng(60);
  EstimatorState s = make_state(3, true);
  const Vec3 foot = test_support::random_vec3(rng);
  s.X.set_column(2, foot);
  s.bias->gyro = Vec3(0.01, -0.02, 0.005);
  s.bias->accel = Vec3(0.1, 0.0, -0.05);
  const ImuSample u{0.0, test_support::random_vec3(rng), test_support::random_vec3(rng)};
  const EstimatorState out = propagate_mean(s, u, 0.01, Vec3(0, 0, -9.81));
  REQUIRE((out.X.column(2) - foot).norm() == 0.0);
  REQUIRE((out.bias->vector() - s.bias->vector()).norm() == 0.0);
}

TEST_CASE("bias correction is applied to the inputs") {
  EstimatorState s = make_state(2, true);
  s.bias->gyro = Vec3(0, 0, 0.1);
  s.bias->accel = Vec3(0.2, 0, 0);
  ImuSample u;
  u.omega = Vec3(0, 0, 0.1);               // exactly the bias: no rotation
  u.accel = Vec3(0.2, 0, 9.80665);         // bias + gravity reaction
  const EstimatorState out = propagate_mean(s, u, 0.02, Vec3(0, 0, -9.80665));
  REQUIRE((out.X.matrix() - s.X.matrix()).norm() < 1e-14);
}

TEST_CASE("propagate_mean rejects non-positive dt") {
  EstimatorState s = make_state(2, false);
  REQUIRE_THROWS_AS(propagate_mean(s, ImuSample{}, 0.0, Vec3(0, 0, -9.81)),
                    NonPositiveDt);
}

TEST_CASE("bias-free error dynamics are bitwise state-independent") {
  Rng rng(61);
  const Vec3 g(0, 0, -9.80665);
  Eigen::MatrixXd first;
  for (int t = 0; t < 100; ++t) {
    EstimatorState s = make_state(2, false);
    s.X = SEK3(test_support::random_rotation(rng),
               {test_support::random_vec3(rng, 3.0), test_support::random_vec3(rng, 3.0)});
    const Eigen::MatrixXd A = error_dynamics_matrix(s, g);
    if (t == 0) {
      first = A;
    } else {
      REQUIRE(std::memcmp(first.data(), A.data(),
                          sizeof(double) * static_cast<size_t>(A.size())) == 0);
    }
  }
}

TEST_CASE("biased error dynamics at the identity have -I bias blocks") {
  const Vec3 g(0, 0, -9.81);
  EstimatorState s = make_state(2, true);
  const Eigen::MatrixXd A = error_dynamics_matrix(s, g);
  const int bo = s.bias_offset();
  REQUIRE((A.block<3, 3>(0, bo) + Mat3::Identity()).norm() == 0.0);
  REQUIRE((A.block<3, 3>(3, bo + 3) + Mat3::Identity()).norm() == 0.0);
  REQUIRE(A.block<3, 3>(3, bo).norm() == 0.0);   // -skew(v)R vanishes at v = 0
  REQUIRE(A.block<3, 3>(6, bo).norm() == 0.0);   // -skew(p)R vanishes at p = 0
}

TEST_CASE("biased error dynamics match a finite-difference Jacobian") {
  Rng rng(62);
  const Vec3 g(0, 0, -9.80665);
  EstimatorState s = make_state(3, true);
  s.X = SEK3(test_support::random_rotation(rng, 1.5),
             {test_support::random_vec3(rng), test_support::random_vec3(rng),
              test_support::random_vec3(rng)});
  s.bias->gyro = test_support::random_vec3(rng, 0.02);
  s.bias->accel = test_support::random_vec3(rng, 0.05);
  const ImuSample u{0.0, test_support::random_vec3(rng, 0.8),
                    test_support::random_vec3(rng, 2.0)};

  // d/dt of the right-invariant error (xi, zeta) at the linearization point,
  // evaluated by flowing the estimate and a perturbed truth with RK4 and
  // differencing the group log symmetrically in time.
  const int gdim = s.X.tangent_dim();
  const int dim = s.tangent_dim();
  const double h = 1e-4;
  auto error_rate = [&](const Eigen::VectorXd& e) -> Eigen::VectorXd {
    const Tangent xi = e.head(gdim);
    const Vec3 zg = e.segment<3>(gdim);
    const Vec3 za = e.segment<3>(gdim + 3);
    const Eigen::MatrixXd Xbar0 = s.X.matrix();
    const Eigen::MatrixXd Xtrue0 = (exp_sek3(-xi) * s.X).matrix();
    auto in_est = [&](double, Vec3& w, Vec3& a) {
      w = u.omega - s.bias->gyro;
      a = u.accel - s.bias->accel;
    };
    auto in_true = [&](double, Vec3& w, Vec3& a) {
      w = u.omega - (s.bias->gyro - zg);
      a = u.accel - (s.bias->accel - za);
    };
    Eigen::VectorXd rate(dim);
    const auto eta_log = [&](double t_end) {
      const Eigen::MatrixXd Xb = rk4_flow(Xbar0, in_est, g, 0.0, t_end, 1);
      const Eigen::MatrixXd Xt = rk4_flow(Xtrue0, in_true, g, 0.0, t_end, 1);
      return log_sek3(SEK3::FromMatrix(Xb) * inverse(SEK3::FromMatrix(Xt)));
    };
    rate.head(gdim) = (eta_log(h) - eta_log(-h)) / (2.0 * h);
    rate.tail<6>().setZero();  // bias errors are constant without noise
    return rate;
  };

  const Eigen::MatrixXd A = error_dynamics_matrix(s, g);
  const double eps = 1e-4;
  for (int j = 0; j < dim; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(j) = eps;
    const Eigen::VectorXd col = (error_rate(e) - error_rate(-e)) / (2.0 * eps);
    INFO("column " << j);
    REQUIRE((col - A.col(j)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("discretize of the zero matrix is the identity") {
  const Eigen::MatrixXd phi = discretize(Eigen::MatrixXd::Zero(9, 9), 0.01);
  REQUIRE((phi - Eigen::MatrixXd::Identity(9, 9)).norm() == 0.0);
}

TEST_CASE("bias-free transition matrix has the closed-form gravity blocks") {
  const Vec3 g(0, 0, -9.80665);
  const double dt = 0.01;
  EstimatorState s = make_state(2, false);
  const Eigen::MatrixXd phi = discretize(error_dynamics_matrix(s, g), dt);

  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(9, 9);
  expected.block<3, 3>(3, 0) = skew(g) * dt;
  expected.block<3, 3>(6, 0) = 0.5 * skew(g) * dt * dt;
  expected.block<3, 3>(6, 3) = dt * Mat3::Identity();
  REQUIRE((phi - expected).norm() == 0.0);
}

TEST_CASE("biased transition matrix matches the expm oracle") {
  Rng rng(63);
  const Vec3 g(0, 0, -9.80665);
  for (int t = 0; t < 20; ++t) {
    EstimatorState s = make_state(2 + static_cast<int>(rng() % 2), true);
    std::vector<Vec3> cols;
    for (int i = 0; i < s.X.slots(); ++i) cols.push_back(test_support::random_vec3(rng, 2.0));
    s.X = SEK3(test_support::random_rotation(rng), std::move(cols));
    const Eigen::MatrixXd A = error_dynamics_matrix(s, g);
    const Eigen::MatrixXd phi = discretize(A, 0.005);
    REQUIRE((phi - test_support::expm(A * 0.005)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("process noise blocks scale with dt and the stated densities") {
  ImuNoiseParams n;
  n.gyro_density = 0.02;
  n.accel_density = 0.0;
  n.gyro_bias_walk = 0.0;
  n.accel_bias_walk = 0.0;
  n.contact_density = 0.0;
  const double dt = 0.004;
  const Eigen::MatrixXd Q = build_Qd(n, dt, 2, false);
  REQUIRE((Q.block<3, 3>(0, 0) - 0.02 * 0.02 * dt * Mat3::Identity()).norm() == 0.0);
  REQUIRE(Q.bottomRightCorner(6, 6).norm() == 0.0);

  ImuNoiseParams zero;
  zero.gyro_density = zero.accel_density = 0.0;
  zero.gyro_bias_walk = zero.accel_bias_walk = zero.contact_density = 0.0;
  REQUIRE(build_Qd(zero, dt, 3, true).norm() == 0.0);
}

TEST_CASE("the adopted discretization is within 10% of van Loan") {
  const Vec3 g(0, 0, -9.80665);
  const double dt = 0.005;
  ImuNoiseParams n;
  n.gyro_density = 0.01;
  n.accel_density = 0.1;
  n.gyro_bias_walk = 1e-4;
  n.accel_bias_walk = 1e-3;
  EstimatorState s = make_state(2, true);
  s.X.set_column(0, Vec3(1.0, -0.5, 0.2));
  s.X.set_column(1, Vec3(3.0, 2.0, 0.0));

  const Eigen::MatrixXd A = error_dynamics_matrix(s, g);
  const Eigen::MatrixXd Qc = build_Qd(n, 1.0, 2, true);  // density matrix
  const int dim = s.tangent_dim();

  // Van Loan block-matrix construction of the exact discrete noise.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * dim, 2 * dim);
  M.topLeftCorner(dim, dim) = -A * dt;
  M.topRightCorner(dim, dim) = Qc * dt;
  M.bottomRightCorner(dim, dim) = A.transpose() * dt;
  const Eigen::MatrixXd E = test_support::expm(M);
  const Eigen::MatrixXd PhiT = E.bottomRightCorner(dim, dim);
  const Eigen::MatrixXd Qd_vanloan = PhiT.transpose() * E.topRightCorner(dim, dim);

  const Eigen::MatrixXd Phi = discretize(A, dt);
  const Eigen::MatrixXd Qd_adopted = Phi * build_Qd(n, dt, 2, true) * Phi.transpose();
  REQUIRE((Qd_adopted - Qd_vanloan).norm() <= 0.1 * Qd_vanloan.norm());
}

TEST_CASE("covariance propagation identities") {
  Rng rng(64);
  EstimatorState s = make_state(2, false);
  s.P = test_support::random_spd(rng, 9, 0.1);

  SECTION("identity transition with zero noise is a no-op") {
    const auto out = propagate_covariance(s, Eigen::MatrixXd::Identity(9, 9),
                                          Eigen::MatrixXd::Zero(9, 9));
    REQUIRE((out.P - s.P).norm() < 1e-14);
  }

  SECTION("identity mean makes the additive term exactly Qd") {
    const Eigen::MatrixXd Qd = test_support::random_spd(rng, 9, 0.05);
    const auto out = propagate_covariance(s, Eigen::MatrixXd::Zero(9, 9), Qd);
    REQUIRE((out.P - Qd).norm() < 1e-14);
  }

  SECTION("scalar Riccati propagation") {
    // With Phi = 2 I and Qd = q I at the identity mean every diagonal entry
    // follows p+ = 4 p + q independently.
    EstimatorState d = make_state(2, false);
    d.P = 0.3 * Eigen::MatrixXd::Identity(9, 9);
    const auto out = propagate_covariance(d, 2.0 * Eigen::MatrixXd::Identity(9, 9),
                                          0.07 * Eigen::MatrixXd::Identity(9, 9));
    REQUIRE((out.P - (4.0 * 0.3 + 0.07) * Eigen::MatrixXd::Identity(9, 9)).norm() < 1e-12);
  }

  SECTION("shape mismatch is refused") {
    REQUIRE_THROWS_AS(propagate_covariance(s, Eigen::MatrixXd::Identity(8, 8),
                                           Eigen::MatrixXd::Zero(8, 8)),
                      DimensionMismatch);
  }
}

TEST_CASE("bias-free covariance propagation is trajectory-independent") {
  // The transition matrix contains no state symbols, so with equal noise
  // sequences two different trajectories produce identical covariances when
  // the noise is expressed in the world frame (here: zero noise).
  Rng rng(65);
  const Vec3 g(0, 0, -9.80665);
  ImuNoiseParams quiet;
  quiet.gyro_density = quiet.accel_density = 0.0;
  quiet.gyro_bias_walk = quiet.accel_bias_walk = quiet.contact_density = 0.0;

  EstimatorState a = make_state(2, false);
  EstimatorState b = make_state(2, false);
  b.X = SEK3(test_support::random_rotation(rng),
             {test_support::random_vec3(rng, 2.0), test_support::random_vec3(rng, 2.0)});
  const Eigen::MatrixXd P0 = test_support::random_spd(rng, 9, 0.1);
  a.P = P0;
  b.P = P0;

  for (int i = 0; i < 50; ++i) {
    const ImuSample u{i * 0.01, test_support::random_vec3(rng),
                      test_support::random_vec3(rng, 3.0)};
    quiet.gravity = g;
    a = propagate(a, u, 0.01, quiet);
    const ImuSample u2{i * 0.01, test_support::random_vec3(rng),
                       test_support::random_vec3(rng, 3.0)};
    b = propagate(b, u2, 0.01, quiet);
  }
  REQUIRE(std::memcmp(a.P.data(), b.P.data(), sizeof(double) * 81) == 0);
}

TEST_CASE("group-affine identity holds for the inertial dynamics") {
  Rng rng(66);
  const Vec3 g(0, 0, -9.80665);
  for (int t = 0; t < 100; ++t) {
    std::vector<Vec3> c1{test_support::random_vec3(rng, 2.0), test_support::random_vec3(rng, 2.0)};
    std::vector<Vec3> c2{test_support::random_vec3(rng, 2.0), test_support::random_vec3(rng, 2.0)};
    const SEK3 X1(test_support::random_rotation(rng), c1);
    const SEK3 X2(test_support::random_rotation(rng), c2);
    const Vec3 w = test_support::random_vec3(rng);
    const Vec3 a = test_support::random_vec3(rng, 3.0);

    auto f = [&](const Eigen::MatrixXd& X) { return continuous_f(X, w, a, g); };
    const Eigen::MatrixXd I5 = Eigen::MatrixXd::Identity(5, 5);
    const Eigen::MatrixXd lhs = f(X1.matrix() * X2.matrix());
    const Eigen::MatrixXd rhs = f(X1.matrix()) * X2.matrix() +
                                X1.matrix() * f(X2.matrix()) -
                                X1.matrix() * f(I5) * X2.matrix();
    REQUIRE((lhs - rhs).norm() < 1e-9);
  }
}

TEST_CASE("log-linear error evolution over one second") {
  Rng rng(67);
  const Vec3 g(0, 0, -9.80665);
  ImuNoiseParams quiet;
  quiet.gravity = g;

  const double dt = 1e-4;
  const int steps = 10000;

  EstimatorState truth = make_state(2, false);
  truth.X = SEK3(test_support::random_rotation(rng, 1.0),
                 {test_support::random_vec3(rng), test_support::random_vec3(rng)});

  Tangent xi0 = test_support::random_vector(rng, 9, 0.15);
  EstimatorState est = truth;
  est.X = exp_sek3(xi0) * truth.X;

  const Eigen::MatrixXd A = error_dynamics_matrix(truth, g);
  const Eigen::MatrixXd Phi_step = discretize(A, dt);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(9, 9);

  for (int i = 0; i < steps; ++i) {
    const ImuSample u{i * dt, test_support::random_vec3(rng, 0.5),
                      test_support::random_vec3(rng, 2.0)};
    truth = propagate_mean(truth, u, dt, g);
    est = propagate_mean(est, u, dt, g);
    Phi = Phi_step * Phi;
  }

  const Tangent xi_t = log_sek3(est.X * inverse(truth.X));
  REQUIRE((xi_t - Phi * xi0).norm() <= 1e-5 * xi0.norm());
}

TEST_CASE("halving dt at least halves the integration error") {
  const Vec3 g(0, 0, -9.80665);
  auto input = [](double t, Vec3& w, Vec3& a) {
    w = Vec3(0.8 * std::sin(3.0 * t), 0.5 * std::cos(2.0 * t), 0.6);
    a = Vec3(1.0 * std::cos(4.0 * t), -0.7, 9.5 * std::sin(t));
  };
  const Eigen::MatrixXd truth =
      rk4_flow(SEK3::Identity(2).matrix(), input, g, 0.0, 1.0, 20000);

  auto run = [&](double dt) {
    EstimatorState s = make_state(2, false);
    const int n = static_cast<int>(std::round(1.0 / dt));
    Vec3 w, a;
    for (int i = 0; i < n; ++i) {
      input(i * dt, w, a);
      s = propagate_mean(s, ImuSample{i * dt, w, a}, dt, g);
    }
    return (s.X.matrix() - truth).norm();
  };

  const double coarse = run(0.02);
  const double fine = run(0.01);
  REQUIRE(fine <= coarse / 2.0 * 1.1);
}
