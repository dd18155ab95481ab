#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "containment/dynamics.h"
#include "containment/linalg.h"
#include "support.h"

namespace containment {
namespace {

using testing::v2;

// Taylor series on A / 2^s followed by s squarings; shares nothing with the
// Pade route.
Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& a) {
  int s = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.05) {
    norm /= 2.0;
    ++s;
  }
  const Eigen::MatrixXd b = a / std::ldexp(1.0, s);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * b / k;
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

Eigen::MatrixXd harmonic_s1(int n) { return -Eigen::MatrixXd::Identity(n, n); }

TEST(Expm, ZeroAndRotation) {
  EXPECT_TRUE(expm(Eigen::MatrixXd::Zero(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  Eigen::MatrixXd s(2, 2);
  s << 0, 1, -1, 0;
  const double t = 0.7;
  Eigen::MatrixXd expected(2, 2);
  expected << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  EXPECT_LT((expm(s * t) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Expm, MatchesTaylorOracleOnRandomMatrices) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const double scale = std::pow(10.0, -2.0 + 3.0 * static_cast<double>(rng() % 1000) / 1000.0);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = scale * gauss(rng);
    }
    const Eigen::MatrixXd e = expm(a);
    const Eigen::MatrixXd o = taylor_expm(a);
    EXPECT_LT((e - o).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + o.cwiseAbs().maxCoeff())) << "trial " << trial;
  }
}

TEST(Expm, NilpotentIsExact) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 2.0;
  a(1, 2) = 3.0;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(3, 3) + a;
  expected(0, 2) = 3.0;  // a^2 / 2
  EXPECT_LT((expm(a) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Drift, RegistryAndBounds) {
  EXPECT_THROW(drift_by_name("cubic"), ConfigError);
  const auto names = drift_names();
  EXPECT_NE(std::find(names.begin(), names.end(), "square_velocity"), names.end());
  const Drift& d = drift_by_name("square_velocity");
  const Vec f = d.f(v2(0, 0), v2(2, 3));
  EXPECT_DOUBLE_EQ(f[0], 4.0);
  EXPECT_DOUBLE_EQ(f[1], 9.0);
  EXPECT_LE(drift_bound_slack(d, 2, 2000, 10.0, 1), 1e-12);
  EXPECT_LE(drift_bound_slack(drift_by_name("zero"), 3, 100, 10.0, 1), 0.0);
}

TEST(FollowerRhs, Examples) {
  const auto di = AgentModel::double_integrator(2);
  auto r = follower_rhs(di, v2(0, 0), v2(1, 0), v2(0, 0));
  EXPECT_EQ(r.dp, v2(1, 0));
  EXPECT_EQ(r.dv, v2(0, 0));

  const auto nl = AgentModel::nonlinear(2, "square_velocity");
  r = follower_rhs(nl, v2(0, 0), v2(2, 3), v2(0.5, -1));
  EXPECT_EQ(r.dv - v2(0.5, -1), v2(4, 9));

  const auto osc = AgentModel::oscillator(harmonic_s1(2), Eigen::MatrixXd::Zero(2, 2));
  r = follower_rhs(osc, v2(1, 0), v2(0, 0), v2(0, 0));
  EXPECT_EQ(r.dv, v2(-1, 0));

  EXPECT_THROW(follower_rhs(di, testing::v1(0), v2(0, 0), v2(0, 0)), std::invalid_argument);
}

TEST(FollowerRhs, LinearInGamma) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  Eigen::MatrixXd s1(2, 2), s2(2, 2);
  s1 << -2, 0.5, 0.5, -1;
  s2 << 0, 1, -1, 0;
  const std::vector<AgentModel> models = {AgentModel::double_integrator(2),
                                          AgentModel::nonlinear(2, "square_velocity"),
                                          AgentModel::oscillator(s1, s2)};
  for (const auto& m : models) {
    for (int k = 0; k < 50; ++k) {
      const Vec p = v2(u(rng), u(rng)), v = v2(u(rng), u(rng));
      const Vec g1 = v2(u(rng), u(rng)), g2 = v2(u(rng), u(rng));
      const double a = u(rng), b = u(rng);
      const Vec base = follower_accel(m, p, v, v2(0, 0));
      const Vec lhs = follower_accel(m, p, v, a * g1 + b * g2) - base;
      const Vec rhs = a * (follower_accel(m, p, v, g1) - base) + b * (follower_accel(m, p, v, g2) - base);
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(DampedWaveLeaders, AccelMatchesFiniteDifference) {
  const double h = 1e-5;
  for (int i = 7; i <= 10; ++i) {
    for (double t : {0.0, 1.0, 3.3, 12.0}) {
      const double fd = (damped_wave_velocity_offset(i, t + h) - damped_wave_velocity_offset(i, t - h)) / (2 * h);
      EXPECT_NEAR(damped_wave_accel(i, t), fd, 1e-6) << i << " " << t;
    }
  }
}

TEST(DampedWaveLeaders, SignAndScaleByIndex) {
  EXPECT_NEAR(damped_wave_accel(8, 0.0) / damped_wave_accel(7, 0.0), -8.0 / 7.0, 1e-14);
  EXPECT_NEAR(damped_wave_velocity_offset(7, 0.0), -7.0, 1e-14);
  EXPECT_NEAR(damped_wave_velocity_offset(10, 0.0), 10.0, 1e-14);
}

TEST(DampedWaveLeaders, PositionOffsetIntegratesVelocity) {
  // Composite Simpson rule as the oracle.
  for (int i : {7, 10}) {
    const double t = 5.0;
    const int n = 2000;
    const double h = t / n;
    double sum = damped_wave_velocity_offset(i, 0) + damped_wave_velocity_offset(i, t);
    for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * damped_wave_velocity_offset(i, k * h);
    EXPECT_NEAR(damped_wave_position_offset(i, t), sum * h / 3.0, 1e-10);
  }
}

TEST(DampedWaveLeaders, TrajectoryConvergesToLimitVelocity) {
  LeaderTrajectory tr;
  tr.kind = LeaderKind::DampedWave;
  tr.p0 = v2(1, 2);
  tr.v_d = v2(1, 0.1);
  tr.index = 9;
  EXPECT_LT((tr.initial_velocity() - v2(1 - 9, 0.1 - 9)).norm(), 1e-14);
  for (double t = 60.0; t <= 100.0; t += 0.5) {
    EXPECT_LT((tr.velocity(t) - tr.v_d).norm(), 1e-3);
    EXPECT_LT(tr.accel(t, tr.position(t), tr.velocity(t)).norm(), 1e-3);
  }
  const double h = 1e-5;
  const Vec fd = (tr.position(2.0 + h) - tr.position(2.0 - h)) / (2 * h);
  EXPECT_LT((fd - tr.velocity(2.0)).norm(), 1e-8);
}

TEST(Leaders, ConstantVelocityAndStationary) {
  LeaderTrajectory c;
  c.kind = LeaderKind::ConstantVelocity;
  c.p0 = v2(1, 1);
  c.v_d = v2(2, -1);
  EXPECT_EQ(c.position(2.0), v2(5, -1));
  LeaderTrajectory s;
  s.kind = LeaderKind::Stationary;
  s.p0 = v2(3, 4);
  EXPECT_EQ(s.position(7.0), v2(3, 4));
  EXPECT_EQ(s.velocity(7.0), v2(0, 0));
  EXPECT_THROW(leader_kind_from_string("circle"), ConfigError);
}

TEST(OscillatorSpectrum, Examples) {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_TRUE(check_oscillator_spectrum(harmonic_s1(2), z).pass);
  EXPECT_FALSE(check_oscillator_spectrum(z, z).pass);
  Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(2, 2);
  s1.diagonal() << -1, -4;
  const auto rep = check_oscillator_spectrum(s1, z);
  EXPECT_TRUE(rep.pass);
  std::vector<double> imag;
  for (Eigen::Index k = 0; k < rep.eigenvalues.size(); ++k) imag.push_back(std::abs(rep.eigenvalues[k].imag()));
  std::sort(imag.begin(), imag.end());
  EXPECT_NEAR(imag[0], 1.0, 1e-12);
  EXPECT_NEAR(imag[3], 2.0, 1e-12);
  EXPECT_FALSE(check_oscillator_spectrum(harmonic_s1(2), -z - Eigen::MatrixXd::Identity(2, 2)).pass);  // damped
}

TEST(OscillatorFlow, ClosedFormsAndSemigroup) {
  Eigen::MatrixXd s1(1, 1), s2(1, 1);
  s1 << -1;
  s2 << 0;
  const Eigen::MatrixXd s = oscillator_matrix(s1, s2);
  EXPECT_TRUE(oscillator_flow(s, 0.0).isApprox(Eigen::MatrixXd::Identity(2, 2)));
  Eigen::MatrixXd quarter(2, 2);
  quarter << 0, 1, -1, 0;
  EXPECT_LT((oscillator_flow(s, std::numbers::pi / 2) - quarter).cwiseAbs().maxCoeff(), 1e-14);

  Eigen::MatrixXd s1b(2, 2);
  s1b << -2, 0.3, 0.3, -1;
  const Eigen::MatrixXd sb = oscillator_matrix(s1b, Eigen::MatrixXd::Zero(2, 2));
  const Eigen::MatrixXd ab = oscillator_flow(sb, 0.37) * oscillator_flow(sb, 1.9);
  EXPECT_LT((ab - oscillator_flow(sb, 2.27)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(OscillatorFlow, HarmonicOrbitNormIsConstant) {
  const Eigen::MatrixXd s = oscillator_matrix(harmonic_s1(2), Eigen::MatrixXd::Zero(2, 2));
  Eigen::VectorXd x0(4);
  x0 << 1, -2, 0.5, 3;
  for (double t = 0.0; t < 50.0; t += 0.77) {
    EXPECT_NEAR((oscillator_flow(s, t) * x0).norm(), x0.norm(), 1e-10);
  }
}

TEST(OscillatorFlowCache, MemoizesOnGrid) {
  const Eigen::MatrixXd s = oscillator_matrix(harmonic_s1(2), Eigen::MatrixXd::Zero(2, 2));
  OscillatorFlowCache cache(s, 0.01);
  const Eigen::MatrixXd a = cache.flow(0.25);
  EXPECT_LT((a - oscillator_flow(s, 0.25)).cwiseAbs().maxCoeff(), 1e-13);
  cache.flow(0.25);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_THROW(cache.flow(0.255), std::exception);
}

TEST(OscillatorLeader, FollowsFlow) {
  LeaderTrajectory tr;
  tr.kind = LeaderKind::OscillatorFree;
  tr.p0 = v2(3, 0);
  tr.v0 = v2(0, 3);
  tr.s1 = harmonic_s1(2);
  tr.s2 = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_LT((tr.position(1.2) - v2(3 * std::cos(1.2), 3 * std::sin(1.2))).norm(), 1e-12);
  EXPECT_LT((tr.velocity(1.2) - v2(-3 * std::sin(1.2), 3 * std::cos(1.2))).norm(), 1e-12);
  EXPECT_LT((tr.accel(0.0, v2(1, 2), v2(0, 0)) - v2(-1, -2)).norm(), 1e-15);
}

TEST(ModelKind, StringRoundTrip) {
  for (auto k : {ModelKind::DoubleIntegrator, ModelKind::NonlinearFollower, ModelKind::Oscillator}) {
    EXPECT_EQ(model_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(model_kind_from_string("unicycle"), ConfigError);
}

}  // namespace
}  // namespace containment
