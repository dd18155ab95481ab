#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "containment/comm.h"
#include "containment/topology.h"
#include "containment/types.h"

namespace containment {

enum class PerturbationKind { Zero, Constant, Sinusoid, DecayingExp };

std::string to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& name);  // throws ConfigError

/// zero; constant a; sinusoid a sin(omega t + phase); decaying_exp a e^{-rate t}.
struct Perturbation {
  PerturbationKind kind = PerturbationKind::Zero;
  Vec amplitude;
  double omega = 1.0;
  double phase = 0.0;
  double rate = 1.0;

  Vec value(double t, int dim) const;
  /// Sinusoids and constants do not vanish.
  bool vanishing() const;
};

/// Leader filters eta_dot = Psi(t); follower i:
///   eta_dot = -k_eta (eta - delta) + Phi1(t),
///   zeta_dot = (H kron I) zeta + (B kron I) eps + Phi2(t),
///   delta = alpha zeta_1 + (1 - alpha) eps,
/// with eps the weighted average of the last received neighbor eta and H
/// upper bidiagonal (-h_l on the diagonal, h_l above it), B = (0, ..., h_sigma).
struct CascadeSystem {
  int dim = 2;
  Eigen::MatrixXd weights;
  int followers = 0;
  int alpha = 1;
  std::vector<double> k_eta;                // per follower
  std::vector<std::vector<double>> h;       // per follower, size = filter order
  std::vector<Perturbation> phi1;           // per follower
  std::vector<Perturbation> phi2;           // per follower, applied to every zeta block
  std::vector<Perturbation> psi;            // per leader
  std::vector<Vec> eta0;                    // per agent
  std::vector<std::vector<Vec>> zeta0;      // per follower, per block; empty means zero
  CommConfig comm;
  double dt = 0.01;
  double t_end = 60.0;
  double record_interval = 0.01;

  DirectedTopology topology() const { return DirectedTopology(weights, followers); }
  /// Throws ConfigError on inconsistent sizes, nonpositive gains, filter
  /// order < 1, alpha not in {0, 1}, or an invalid time grid.
  void validate() const;
  /// Copy with k_eta and every h scaled by `multiplier`.
  CascadeSystem with_gain_multiplier(double multiplier) const;
};

/// Quantities recorded per follower at each sample, as norms.
struct CascadeSample {
  double t = 0.0;
  double error = 0.0;                          // |eta_F - (W kron I) eta_L|
  std::vector<double> eta_tilde;               // |eta_i - eta_c,i|, eta_c = W eta_L
  std::vector<std::vector<double>> zeta_tilde; // |zeta_{i,l} - eta_c,i|
  std::vector<double> u;                       // |eps_i - eta_c,i|, sup over the step
  std::vector<double> y;                       // |Phi1_i - eta_c_dot,i|, sup over the step
  std::vector<std::vector<double>> upsilon;    // |Phi2_i - eta_c_dot,i|, sup over the step
  std::vector<double> eta_dot;                 // |eta_i_dot|
};

struct CascadeTrace {
  std::vector<CascadeSample> samples;
  std::vector<double> k_eta;
  std::vector<std::vector<double>> h;
  int alpha = 1;
  double dt = 0.0;
};

/// RK4 integration of the cascade with sampled, delayed, lossy exchange of
/// eta over the comm model. Every sample carries sup-over-step input norms
/// so the estimates can be checked on the recorded grid.
CascadeTrace simulate_cascade(const CascadeSystem& sys, std::uint64_t seed);

/// Sup of the error over the final 20% of the horizon.
double steady_state_bound(const CascadeTrace& trace);

/// steady_state_bound for each multiplier of (k_eta, h).
std::vector<double> gain_sweep_attenuation(const CascadeSystem& sys,
                                           const std::vector<double>& multipliers,
                                           std::uint64_t seed);

/// steady_state_bound for each blackout bound T*.
std::vector<double> blackout_sweep(const CascadeSystem& sys, const std::vector<double>& bounds,
                                   std::uint64_t seed);

struct EstimateViolation {
  int follower = 0;
  std::string estimate;  // "eta" or "zeta_<l>" (one-based l)
  double t0 = 0.0;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct EstimateReport {
  int pairs_checked = 0;
  std::vector<EstimateViolation> violations;
};

inline constexpr int kEstimateGrid = 20;
inline constexpr double kEstimateTolerance = 1e-6;

/// Checks the exponential-decay-plus-gain estimates for eta_tilde and every
/// zeta_tilde block on a 20 x 20 grid of (t0, t - t0), both log-spaced in
/// [dt, t_end / 2]. A violation is lhs > rhs + 1e-6 (1 + rhs).
EstimateReport iss_estimate_check(const CascadeTrace& trace);

struct TopologyCertificate {
  ReachabilityReport reachability;
  Eigen::MatrixXd containment_weights;
  bool weights_nonnegative = false;
  bool rows_stochastic = false;
  bool l1_m_matrix = false;
  bool i_minus_gain_m_matrix = false;
  SmallGainCertificate small_gain;

  bool pass() const {
    return reachability.satisfied && weights_nonnegative && rows_stochastic && l1_m_matrix &&
           i_minus_gain_m_matrix && small_gain.pass;
  }
};

/// Every graph check in one place. A failing reachability test leaves the
/// remaining fields false.
TopologyCertificate certify(const DirectedTopology& topo);

}  // namespace containment
