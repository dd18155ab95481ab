#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "containment/comm.h"
#include "containment/dynamics.h"
#include "containment/types.h"

namespace containment {

enum class ControlVariant {
  FullState,              // velocity observer, Gamma uses v
  OutputFeedback,         // velocity observer, position-only feedback through phi
  KnownVdFullState,       // vhat fixed to the known limit velocity
  KnownVdOutputFeedback,
  NonlinearVS,            // reference velocity + variable-structure tracking
  OscillatorFull,
  OscillatorOutput,
};

enum class PsiMode { Static, Dynamic };

std::string to_string(ControlVariant v);
ControlVariant control_variant_from_string(const std::string& name);  // throws ConfigError
std::string to_string(PsiMode m);
PsiMode psi_mode_from_string(const std::string& name);  // throws ConfigError

struct GainSet {
  double k_p = 4.0;
  double k_d = 4.0;
  double L_p = 4.0;
  double L_d = 4.0;
  double k_psi = 1.0;
  double k_phi = 1.0;
  double k_r = 1.0;
  double k_eta = 1.0;
  double lambda = 0.0;  // 0 selects the larger real root of x^2 - k_d x + k_p
  double boundary_layer_eps = 1e-4;
};

/// Larger root of x^2 - k_d x + k_p = 0, so that k_d = lambda + k_p / lambda.
/// Returns nullopt when the discriminant is negative.
std::optional<double> real_root_lambda(double k_p, double k_d);

struct GainReport {
  bool pass = true;
  std::vector<std::string> diagnostics;
};

/// Positivity of the gains the variant uses, the real-roots condition
/// k_d^2 >= 4 k_p where it applies, and Hurwitz stability of
/// -k_phi I + S2 for the oscillator output-feedback law.
GainReport check_gains(ControlVariant variant, PsiMode psi_mode, const GainSet& gains,
                       const Eigen::MatrixXd* s2 = nullptr);

/// Latest message from one in-neighbor; `msg` is null before the first
/// delivery on that edge.
struct NeighborSample {
  double weight = 0.0;
  const Message* msg = nullptr;
};

struct Neighborhood {
  std::vector<NeighborSample> samples;
  double kappa = 0.0;
};

/// p_j(kT) + vhat_j(kT) (t - kT) from a payload (p_j, vhat_j).
Vec vartheta(const Message& msg, double t, int dim);

/// Weighted averages over the in-edges that have delivered at least once,
/// renormalized by the delivered weight. Empty when nothing has arrived.
std::optional<Vec> average_position_estimate(const Neighborhood& nb, double t, int dim);
std::optional<Vec> average_velocity_estimate(const Neighborhood& nb, int dim);
/// Average of e^{S (t - t_k)} (p_j, vhat_j); a 2 dim vector (psi_1, psi_2).
std::optional<Vec> average_flow_estimate(const Neighborhood& nb, double t, int dim,
                                         OscillatorFlowCache& flows);

/// -L_p (vhat - avg).
Vec observer_vhat_deriv(const Vec& vhat, const Vec& vhat_avg, double L_p);

/// -k_d (v - vhat) - k_p (p - psi).
Vec gamma_full_state(const Vec& p, const Vec& v, const Vec& vhat, const Vec& psi,
                     const GainSet& g);

/// -k_psi psi + k_psi avg + vhat.
Vec psi_dynamic_deriv(const Vec& psi, const Vec& theta_avg, const Vec& vhat, double k_psi);

struct OutputFeedbackTerms {
  Vec gamma;
  Vec dphi;
};

/// Gamma = -k_d (phi + p - vhat) - k_p (p - psi), dphi = -(phi + p) + Gamma.
OutputFeedbackTerms gamma_output_feedback(const Vec& p, const Vec& phi, const Vec& vhat,
                                          const Vec& psi, const GainSet& g);

struct NonlinearReference {
  Vec v_r;
  Vec dv_r;
  Vec deta1;
  Vec deta2;
  Vec dvhat;
  Vec dsigma1;
};

/// Reference velocity -lambda (p - eta1) + vhat with its filters and the
/// two-stage velocity observer; v enters only through dv_r.
NonlinearReference nonlinear_reference(const Vec& p, const Vec& v, const Vec& eta1,
                                       const Vec& eta2, const Vec& vhat, const Vec& sigma1,
                                       const Vec& theta_avg, const Vec& vhat_avg,
                                       const GainSet& g, double lambda);

/// Smoothed switching term e/|e| * magnitude (|e| > eps) or e/eps * magnitude.
Vec switching_term(const Vec& e, double magnitude, double eps);

/// -k_r e + dv_r - switching_term(e, delta_p(|p|) + delta_v(|v|), eps).
Vec gamma_nonlinear_vs(const Vec& p, const Vec& v, const Vec& v_r, const Vec& dv_r,
                       const GainSet& g, const Drift& drift);

struct OscillatorTerms {
  Vec gamma;
  Vec dsigma;
  Vec dvhat;
  Vec dphi;  // output-feedback law only
};

/// Full-state oscillator law; psi1, psi2 are the propagated neighbor
/// position and velocity estimates.
OscillatorTerms gamma_oscillator_full(const Vec& p, const Vec& v, const Vec& vhat,
                                      const Vec& sigma, const Vec& psi1, const Vec& psi2,
                                      const GainSet& g, const Eigen::MatrixXd& s1,
                                      const Eigen::MatrixXd& s2);

/// Position-only oscillator law: v is replaced by k_phi (phi + p).
OscillatorTerms gamma_oscillator_output(const Vec& p, const Vec& phi, const Vec& vhat,
                                        const Vec& sigma, const Vec& psi1, const Vec& psi2,
                                        const GainSet& g, const Eigen::MatrixXd& s1,
                                        const Eigen::MatrixXd& s2);

/// Tracking law for the nonlinear follower: maps (p, v, v_r, dv_r) to Gamma.
using TrackingLaw =
    std::function<Vec(const Vec& p, const Vec& v, const Vec& v_r, const Vec& dv_r)>;

struct ControllerSpec {
  ControlVariant variant = ControlVariant::FullState;
  PsiMode psi_mode = PsiMode::Static;
  GainSet gains;
  Vec v_d;  // known-limit-velocity variants
  /// Overrides for initial controller states by label (e.g. "vhat").
  std::map<std::string, Vec> initial;
  /// Replaces the variable-structure law for NonlinearVS when set.
  TrackingLaw tracking_law;
};

struct ControlOutput {
  Vec gamma;
  Vec tracking_error;   // e = v - v_r (NonlinearVS), empty otherwise
  Vec reference_accel;  // dv_r (NonlinearVS), empty otherwise
};

/// Controller of one follower. Internal state is a stack of dim-sized
/// blocks named by internal_labels().
class FollowerController {
 public:
  FollowerController(const ControllerSpec& spec, const AgentModel& model, double dt);

  ControlVariant variant() const { return spec_.variant; }
  const ControllerSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  const std::vector<std::string>& internal_labels() const { return labels_; }
  int internal_size() const { return static_cast<int>(labels_.size()) * dim_; }
  double lambda() const { return lambda_; }

  /// Default initial state: eta blocks and dynamic psi start at p(0), phi at
  /// zero, everything else at zero; `spec.initial` overrides by label.
  Eigen::VectorXd initial_internal(const Vec& p0, const Vec& v0);

  /// Velocity estimate broadcast to neighbors.
  Vec vhat(Eigen::Ref<const Eigen::VectorXd> internal) const;
  /// Broadcast payload (p, vhat).
  Vec payload(const Vec& p, Eigen::Ref<const Eigen::VectorXd> internal) const;

  /// phi + p - v / k_phi for position-only laws (k_phi = 1 for double
  /// integrators); empty otherwise.
  Vec observer_error(const Vec& p, const Vec& v, Eigen::Ref<const Eigen::VectorXd> internal) const;

  /// Writes the internal-state derivative and the control output. `v` is
  /// read only by the laws that feed back velocity.
  void evaluate(double t, const Vec& p, const Vec& v, Eigen::Ref<const Eigen::VectorXd> internal,
                const Neighborhood& neighbors, Eigen::Ref<Eigen::VectorXd> d_internal,
                ControlOutput& out);

 private:
  int block(const std::string& label) const;  // -1 when absent
  Vec get(Eigen::Ref<const Eigen::VectorXd> x, int b) const { return x.segment(b * dim_, dim_); }

  ControllerSpec spec_;
  AgentModel model_;
  int dim_;
  double lambda_ = 0.0;
  std::vector<std::string> labels_;
  int b_vhat_ = -1, b_psi_ = -1, b_phi_ = -1, b_sigma_ = -1, b_eta1_ = -1, b_eta2_ = -1;
  Vec p0_;
  const Drift* drift_ = nullptr;
  std::unique_ptr<OscillatorFlowCache> flows_;
};

/// Internal state split into named blocks and reassembled; exact round trip.
std::map<std::string, Vec> unpack_internal(const FollowerController& c,
                                           const Eigen::VectorXd& internal);
Eigen::VectorXd pack_internal(const FollowerController& c,
                              const std::map<std::string, Vec>& blocks);

/// Which model a variant drives.
ModelKind model_for_variant(ControlVariant v);

}  // namespace containment
