#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "containment/analysis.h"
#include "support.h"

namespace containment {
namespace {

using testing::bundled;
using testing::v2;

Perturbation sinusoid(double ax, double ay, double omega) {
  Perturbation p;
  p.kind = PerturbationKind::Sinusoid;
  p.amplitude = v2(ax, ay);
  p.omega = omega;
  return p;
}

CascadeSystem baseline() { return cli::to_cascade(bundled("lemma_cascade")); }

CascadeSystem zero_inputs(CascadeSystem sys) {
  for (auto& p : sys.phi1) p = Perturbation{};
  for (auto& p : sys.phi2) p = Perturbation{};
  for (auto& p : sys.psi) p = Perturbation{};
  return sys;
}

TEST(Perturbation, Values) {
  Perturbation c;
  c.kind = PerturbationKind::Constant;
  c.amplitude = v2(1, -2);
  EXPECT_EQ(c.value(5.0, 2), v2(1, -2));
  EXPECT_FALSE(c.vanishing());
  const auto s = sinusoid(2, 1, 3);
  EXPECT_NEAR(s.value(0.5, 2)[0], 2 * std::sin(1.5), 1e-15);
  EXPECT_FALSE(s.vanishing());
  Perturbation d;
  d.kind = PerturbationKind::DecayingExp;
  d.amplitude = v2(1, 1);
  d.rate = 0.5;
  EXPECT_NEAR(d.value(2.0, 2)[1], std::exp(-1.0), 1e-15);
  EXPECT_TRUE(d.vanishing());
  EXPECT_EQ(Perturbation{}.value(1.0, 3), Vec::Zero(3));
  EXPECT_TRUE(Perturbation{}.vanishing());
  for (auto k : {PerturbationKind::Zero, PerturbationKind::Constant, PerturbationKind::Sinusoid,
                 PerturbationKind::DecayingExp}) {
    EXPECT_EQ(perturbation_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(perturbation_kind_from_string("ramp"), ConfigError);
}

TEST(Cascade, Validation) {
  CascadeSystem sys = baseline();
  EXPECT_NO_THROW(sys.validate());
  sys.alpha = 2;
  EXPECT_THROW(sys.validate(), ConfigError);
  sys = baseline();
  sys.k_eta[0] = 0.0;
  EXPECT_THROW(sys.validate(), ConfigError);
  sys = baseline();
  sys.h[1].clear();
  EXPECT_THROW(sys.validate(), ConfigError);
  sys = baseline();
  sys.eta0.pop_back();
  EXPECT_THROW(sys.validate(), ConfigError);
}

TEST(Cascade, GainMultiplierScalesFilters) {
  CascadeSystem sys = baseline();
  for (auto& h : sys.h) h = {1.0, 3.0};
  const auto scaled = sys.with_gain_multiplier(2.0);
  EXPECT_DOUBLE_EQ(scaled.k_eta[0], 2.0 * sys.k_eta[0]);
  EXPECT_DOUBLE_EQ(scaled.h[3][1], 6.0);
}

TEST(Cascade, ZeroInputsConverge) {
  const auto tr = simulate_cascade(zero_inputs(baseline()), 1);
  EXPECT_LT(tr.samples.back().error, 1e-3);
  for (double d : tr.samples.back().eta_dot) EXPECT_LT(d, 1e-3);
}

TEST(Cascade, AlphaZeroBypassesFilter) {
  CascadeSystem sys = baseline();
  sys.alpha = 0;
  sys.t_end = 2.0;
  const auto tr = simulate_cascade(sys, 1);
  for (const auto& s : tr.samples) {
    for (const auto& z : s.zeta_tilde) EXPECT_TRUE(z.empty());
  }
}

// One follower fed by one constant leader over ideal links: eta_tilde
// decays exactly like e^{-k t} once the first message is held.
TEST(Cascade, FreeDecayMatchesExponential) {
  CascadeSystem sys;
  sys.dim = 2;
  sys.weights = Eigen::MatrixXd::Zero(2, 2);
  sys.weights(0, 1) = 1.0;
  sys.followers = 1;
  sys.alpha = 0;
  sys.k_eta = {1.5};
  sys.h = {{1.0}};
  sys.phi1 = {Perturbation{}};
  sys.phi2 = {Perturbation{}};
  sys.psi = {Perturbation{}};
  sys.eta0 = {v2(3, -4), v2(1, 1)};
  sys.comm.sampling_period = 0.1;
  sys.comm.blackout_bound = 0.5;
  sys.comm.delay_quantum = 0.01;
  sys.dt = 0.01;
  sys.t_end = 6.0;
  sys.record_interval = 0.01;
  const auto tr = simulate_cascade(sys, 1);
  const auto& a = tr.samples[100];  // t = 1
  const auto& b = tr.samples[400];  // t = 4
  EXPECT_NEAR(b.eta_tilde[0], std::exp(-1.5 * 3.0) * a.eta_tilde[0], 1e-9);
  EXPECT_TRUE(iss_estimate_check(tr).violations.empty());
}

TEST(Cascade, PersistentLeaderMotionStaysBounded) {
  CascadeSystem sys = baseline();
  for (auto& p : sys.psi) p = sinusoid(1.0, 0.5, 0.7);
  const auto tr = simulate_cascade(sys, 2);
  double late = 0.0, all = 0.0;
  for (const auto& s : tr.samples) {
    all = std::max(all, s.error);
    if (s.t > 30) late = std::max(late, s.error);
  }
  EXPECT_TRUE(std::isfinite(all));
  EXPECT_LT(all, 50.0);
  EXPECT_GT(late, 1e-3);  // persistent input keeps a residual error
}

TEST(Cascade, ZeroInputsGiveZeroBoundsAtEveryGain) {
  const auto bounds = gain_sweep_attenuation(zero_inputs(baseline()), {1.0, 2.0, 4.0}, 3);
  for (double b : bounds) EXPECT_LT(b, 1e-3);
}

TEST(Estimates, HoldOnBaselineAndFailWhenCorrupted) {
  CascadeSystem sys = baseline();
  for (auto& p : sys.phi1) p = sinusoid(0.5, -0.3, 1.3);
  for (auto& p : sys.psi) p = sinusoid(0.4, 0.4, 0.5);
  const auto tr = simulate_cascade(sys, 4);
  const auto rep = iss_estimate_check(tr);
  EXPECT_GE(rep.pairs_checked, 100);
  EXPECT_TRUE(rep.violations.empty());

  CascadeTrace bad = tr;
  for (auto& s : bad.samples) {
    for (auto& e : s.eta_tilde) e *= 2.0;
  }
  EXPECT_FALSE(iss_estimate_check(bad).violations.empty());
}

TEST(Certificate, TenAgentPasses) {
  const auto cert = certify(ten_agent_topology());
  EXPECT_TRUE(cert.pass());
  EXPECT_TRUE(cert.i_minus_gain_m_matrix);
}

}  // namespace
}  // namespace containment
