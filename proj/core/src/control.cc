#include "containment/control.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "containment/linalg.h"

namespace containment {

std::string to_string(ControlVariant v) {
  switch (v) {
    case ControlVariant::FullState: return "full_state";
    case ControlVariant::OutputFeedback: return "output_feedback";
    case ControlVariant::KnownVdFullState: return "known_vd_full_state";
    case ControlVariant::KnownVdOutputFeedback: return "known_vd_output_feedback";
    case ControlVariant::NonlinearVS: return "nonlinear_vs";
    case ControlVariant::OscillatorFull: return "oscillator_full";
    case ControlVariant::OscillatorOutput: return "oscillator_output";
  }
  return "unknown";
}

ControlVariant control_variant_from_string(const std::string& name) {
  for (auto v : {ControlVariant::FullState, ControlVariant::OutputFeedback,
                 ControlVariant::KnownVdFullState, ControlVariant::KnownVdOutputFeedback,
                 ControlVariant::NonlinearVS, ControlVariant::OscillatorFull,
                 ControlVariant::OscillatorOutput}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown controller variant '" + name + "'");
}

std::string to_string(PsiMode m) { return m == PsiMode::Static ? "static" : "dynamic"; }

PsiMode psi_mode_from_string(const std::string& name) {
  if (name == "static") return PsiMode::Static;
  if (name == "dynamic") return PsiMode::Dynamic;
  throw ConfigError("unknown psi mode '" + name + "'");
}

ModelKind model_for_variant(ControlVariant v) {
  switch (v) {
    case ControlVariant::NonlinearVS: return ModelKind::NonlinearFollower;
    case ControlVariant::OscillatorFull:
    case ControlVariant::OscillatorOutput: return ModelKind::Oscillator;
    default: return ModelKind::DoubleIntegrator;
  }
}

std::optional<double> real_root_lambda(double k_p, double k_d) {
  const double disc = k_d * k_d - 4.0 * k_p;
  if (disc < 0.0) return std::nullopt;
  return 0.5 * (k_d + std::sqrt(disc));
}

GainReport check_gains(ControlVariant variant, PsiMode psi_mode, const GainSet& g,
                       const Eigen::MatrixXd* s2) {
  GainReport report;
  auto require_positive = [&](const char* name, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      report.pass = false;
      report.diagnostics.push_back(std::string(name) + " must be > 0 (got " +
                                   std::to_string(value) + ")");
    }
  };
  auto require_real_roots = [&] {
    if (g.k_d * g.k_d < 4.0 * g.k_p) {
      report.pass = false;
      report.diagnostics.push_back("real-roots condition k_d^2 >= 4 k_p violated (k_p = " +
                                   std::to_string(g.k_p) + ", k_d = " +
                                   std::to_string(g.k_d) + ")");
    }
  };

  require_positive("k_p", g.k_p);
  require_positive("k_d", g.k_d);
  const bool dynamic_psi = psi_mode == PsiMode::Dynamic;
  switch (variant) {
    case ControlVariant::FullState:
    case ControlVariant::OutputFeedback:
      require_positive("L_p", g.L_p);
      [[fallthrough]];
    case ControlVariant::KnownVdFullState:
    case ControlVariant::KnownVdOutputFeedback:
      if (dynamic_psi) require_positive("k_psi", g.k_psi);
      require_real_roots();
      break;
    case ControlVariant::NonlinearVS:
      require_positive("L_p", g.L_p);
      require_positive("L_d", g.L_d);
      require_positive("k_r", g.k_r);
      require_positive("lambda", g.lambda);
      require_positive("boundary_layer_eps", g.boundary_layer_eps);
      break;
    case ControlVariant::OscillatorFull:
      require_real_roots();
      break;
    case ControlVariant::OscillatorOutput: {
      require_real_roots();
      require_positive("k_phi", g.k_phi);
      if (s2 != nullptr) {
        const auto n = s2->rows();
        const Eigen::MatrixXd m = -g.k_phi * Eigen::MatrixXd::Identity(n, n) + *s2;
        const double worst = eigenvalues(m).real().maxCoeff();
        if (!(worst < 0.0)) {
          report.pass = false;
          report.diagnostics.push_back("-k_phi I + S2 is not Hurwitz (max Re = " +
                                       std::to_string(worst) + ")");
        }
      }
      break;
    }
  }
  return report;
}

Vec vartheta(const Message& msg, double t, int dim) {
  return msg.payload.head(dim) + msg.payload.segment(dim, dim) * (t - msg.send_time);
}

std::optional<Vec> average_position_estimate(const Neighborhood& nb, double t, int dim) {
  Vec sum = Vec::Zero(dim);
  double weight = 0.0;
  for (const auto& s : nb.samples) {
    if (s.msg == nullptr) continue;
    sum += s.weight * vartheta(*s.msg, t, dim);
    weight += s.weight;
  }
  if (weight <= 0.0) return std::nullopt;
  return Vec(sum / weight);
}

std::optional<Vec> average_velocity_estimate(const Neighborhood& nb, int dim) {
  Vec sum = Vec::Zero(dim);
  double weight = 0.0;
  for (const auto& s : nb.samples) {
    if (s.msg == nullptr) continue;
    sum += s.weight * s.msg->payload.segment(dim, dim);
    weight += s.weight;
  }
  if (weight <= 0.0) return std::nullopt;
  return Vec(sum / weight);
}

std::optional<Vec> average_flow_estimate(const Neighborhood& nb, double t, int dim,
                                         OscillatorFlowCache& flows) {
  Vec sum = Vec::Zero(2 * dim);
  double weight = 0.0;
  for (const auto& s : nb.samples) {
    if (s.msg == nullptr) continue;
    const Eigen::MatrixXd& flow = flows.flow(t - s.msg->send_time);
    sum += s.weight * (flow * s.msg->payload.head(2 * dim));
    weight += s.weight;
  }
  if (weight <= 0.0) return std::nullopt;
  return Vec(sum / weight);
}

Vec observer_vhat_deriv(const Vec& vhat, const Vec& vhat_avg, double L_p) {
  return -L_p * (vhat - vhat_avg);
}

Vec gamma_full_state(const Vec& p, const Vec& v, const Vec& vhat, const Vec& psi,
                     const GainSet& g) {
  return -g.k_d * (v - vhat) - g.k_p * (p - psi);
}

Vec psi_dynamic_deriv(const Vec& psi, const Vec& theta_avg, const Vec& vhat, double k_psi) {
  return -k_psi * psi + k_psi * theta_avg + vhat;
}

OutputFeedbackTerms gamma_output_feedback(const Vec& p, const Vec& phi, const Vec& vhat,
                                          const Vec& psi, const GainSet& g) {
  OutputFeedbackTerms out;
  out.gamma = -g.k_d * (phi + p - vhat) - g.k_p * (p - psi);
  out.dphi = -(phi + p) + out.gamma;
  return out;
}

NonlinearReference nonlinear_reference(const Vec& p, const Vec& v, const Vec& eta1,
                                       const Vec& eta2, const Vec& vhat, const Vec& sigma1,
                                       const Vec& theta_avg, const Vec& vhat_avg,
                                       const GainSet& g, double lambda) {
  NonlinearReference r;
  r.v_r = -lambda * (p - eta1) + vhat;
  r.deta1 = -g.k_p * (eta1 - eta2) + vhat;
  r.deta2 = -g.k_d * (eta2 - theta_avg) + vhat;
  r.dvhat = -g.L_p * (vhat - sigma1);
  r.dsigma1 = -g.L_d * (sigma1 - vhat_avg);
  r.dv_r = -lambda * (v - r.deta1) + r.dvhat;
  return r;
}

Vec switching_term(const Vec& e, double magnitude, double eps) {
  const double norm = e.norm();
  if (norm > eps) return e * (magnitude / norm);
  return e * (magnitude / eps);
}

Vec gamma_nonlinear_vs(const Vec& p, const Vec& v, const Vec& v_r, const Vec& dv_r,
                       const GainSet& g, const Drift& drift) {
  const Vec e = v - v_r;
  const double magnitude = drift.bound_p(p.norm()) + drift.bound_v(v.norm());
  return -g.k_r * e + dv_r - switching_term(e, magnitude, g.boundary_layer_eps);
}

OscillatorTerms gamma_oscillator_full(const Vec& p, const Vec& v, const Vec& vhat,
                                      const Vec& sigma, const Vec& psi1, const Vec& psi2,
                                      const GainSet& g, const Eigen::MatrixXd& s1,
                                      const Eigen::MatrixXd& s2) {
  OscillatorTerms out;
  const Vec dv = v - vhat;
  out.gamma = -(g.k_d * dv + s2 * dv) - g.k_p * (p - psi1) + 2.0 * sigma;
  out.dsigma = s1 * dv + s2 * sigma - g.k_d * sigma - g.k_p * (vhat - psi2);
  out.dvhat = s1 * p + s2 * vhat + sigma;
  return out;
}

OscillatorTerms gamma_oscillator_output(const Vec& p, const Vec& phi, const Vec& vhat,
                                        const Vec& sigma, const Vec& psi1, const Vec& psi2,
                                        const GainSet& g, const Eigen::MatrixXd& s1,
                                        const Eigen::MatrixXd& s2) {
  const Vec v_est = g.k_phi * (phi + p);
  OscillatorTerms out = gamma_oscillator_full(p, v_est, vhat, sigma, psi1, psi2, g, s1, s2);
  const Vec q = p + phi;
  out.dphi = -(g.k_phi * q - s2 * q) + (out.gamma + s1 * p) / g.k_phi;
  return out;
}

FollowerController::FollowerController(const ControllerSpec& spec, const AgentModel& model,
                                       double dt)
    : spec_(spec), model_(model), dim_(model.dim) {
  if (model_.kind != model_for_variant(spec_.variant)) {
    throw ConfigError("controller " + to_string(spec_.variant) + " cannot drive a " +
                      to_string(model_.kind) + " agent");
  }
  const Eigen::MatrixXd* s2 = model_.kind == ModelKind::Oscillator ? &model_.s2 : nullptr;
  const auto report = check_gains(spec_.variant, spec_.psi_mode, spec_.gains, s2);
  if (!report.pass) {
    std::string msg = "controller gains rejected:";
    for (const auto& d : report.diagnostics) msg += " " + d + ";";
    throw ConfigError(msg);
  }
  const bool dynamic_psi = spec_.psi_mode == PsiMode::Dynamic;
  switch (spec_.variant) {
    case ControlVariant::FullState:
      labels_ = {"vhat"};
      if (dynamic_psi) labels_.push_back("psi");
      break;
    case ControlVariant::OutputFeedback:
      labels_ = {"vhat"};
      if (dynamic_psi) labels_.push_back("psi");
      labels_.push_back("phi");
      break;
    case ControlVariant::KnownVdFullState:
      if (dynamic_psi) labels_.push_back("psi");
      break;
    case ControlVariant::KnownVdOutputFeedback:
      if (dynamic_psi) labels_.push_back("psi");
      labels_.push_back("phi");
      break;
    case ControlVariant::NonlinearVS:
      labels_ = {"vhat", "sigma1", "eta1", "eta2"};
      drift_ = &drift_by_name(model_.drift_name);
      break;
    case ControlVariant::OscillatorFull:
      labels_ = {"vhat", "sigma"};
      break;
    case ControlVariant::OscillatorOutput:
      labels_ = {"vhat", "sigma", "phi"};
      break;
  }
  if (spec_.variant == ControlVariant::KnownVdFullState ||
      spec_.variant == ControlVariant::KnownVdOutputFeedback) {
    if (spec_.v_d.size() != dim_) throw ConfigError("known-velocity controller needs v_d of size N");
  }
  if (spec_.variant == ControlVariant::NonlinearVS) lambda_ = spec_.gains.lambda;
  b_vhat_ = block("vhat");
  b_psi_ = block("psi");
  b_phi_ = block("phi");
  b_sigma_ = block(spec_.variant == ControlVariant::NonlinearVS ? "sigma1" : "sigma");
  b_eta1_ = block("eta1");
  b_eta2_ = block("eta2");
  if (model_.kind == ModelKind::Oscillator) {
    flows_ = std::make_unique<OscillatorFlowCache>(oscillator_matrix(model_.s1, model_.s2),
                                                   0.5 * dt);
  }
  for (const auto& [label, value] : spec_.initial) {
    if (block(label) < 0) throw ConfigError("controller has no state block '" + label + "'");
    if (value.size() != dim_) throw ConfigError("initial '" + label + "' must have size N");
  }
}

int FollowerController::block(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

Eigen::VectorXd FollowerController::initial_internal(const Vec& p0, const Vec&) {
  p0_ = p0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(internal_size());
  for (int b : {b_psi_, b_eta1_, b_eta2_}) {
    if (b >= 0) x.segment(b * dim_, dim_) = p0;
  }
  for (const auto& [label, value] : spec_.initial) x.segment(block(label) * dim_, dim_) = value;
  return x;
}

Vec FollowerController::vhat(Eigen::Ref<const Eigen::VectorXd> internal) const {
  if (b_vhat_ < 0) return spec_.v_d;
  return get(internal, b_vhat_);
}

Vec FollowerController::payload(const Vec& p, Eigen::Ref<const Eigen::VectorXd> internal) const {
  Vec out(2 * dim_);
  out << p, vhat(internal);
  return out;
}

Vec FollowerController::observer_error(const Vec& p, const Vec& v,
                                       Eigen::Ref<const Eigen::VectorXd> internal) const {
  if (b_phi_ < 0) return Vec();
  const double k_phi =
      spec_.variant == ControlVariant::OscillatorOutput ? spec_.gains.k_phi : 1.0;
  return get(internal, b_phi_) + p - v / k_phi;
}

void FollowerController::evaluate(double t, const Vec& p, const Vec& v,
                                  Eigen::Ref<const Eigen::VectorXd> x, const Neighborhood& nb,
                                  Eigen::Ref<Eigen::VectorXd> dx, ControlOutput& out) {
  const GainSet& g = spec_.gains;
  const Vec vh = vhat(x);
  out.tracking_error.resize(0);
  out.reference_accel.resize(0);

  switch (spec_.variant) {
    case ControlVariant::FullState:
    case ControlVariant::OutputFeedback:
    case ControlVariant::KnownVdFullState:
    case ControlVariant::KnownVdOutputFeedback: {
      const auto theta = average_position_estimate(nb, t, dim_);
      const Vec theta_avg = theta ? *theta : p0_;
      if (b_vhat_ >= 0) {
        const auto vavg = average_velocity_estimate(nb, dim_);
        dx.segment(b_vhat_ * dim_, dim_) = observer_vhat_deriv(vh, vavg ? *vavg : vh, g.L_p);
      }
      Vec psi;
      if (b_psi_ >= 0) {
        psi = get(x, b_psi_);
        dx.segment(b_psi_ * dim_, dim_) = psi_dynamic_deriv(psi, theta_avg, vh, g.k_psi);
      } else {
        psi = theta_avg;
      }
      if (b_phi_ >= 0) {
        const auto terms = gamma_output_feedback(p, get(x, b_phi_), vh, psi, g);
        dx.segment(b_phi_ * dim_, dim_) = terms.dphi;
        out.gamma = terms.gamma;
      } else {
        out.gamma = gamma_full_state(p, v, vh, psi, g);
      }
      break;
    }
    case ControlVariant::NonlinearVS: {
      const auto theta = average_position_estimate(nb, t, dim_);
      const auto vavg = average_velocity_estimate(nb, dim_);
      const auto r = nonlinear_reference(p, v, get(x, b_eta1_), get(x, b_eta2_), vh,
                                         get(x, b_sigma_), theta ? *theta : p0_,
                                         vavg ? *vavg : vh, g, lambda_);
      dx.segment(b_vhat_ * dim_, dim_) = r.dvhat;
      dx.segment(b_sigma_ * dim_, dim_) = r.dsigma1;
      dx.segment(b_eta1_ * dim_, dim_) = r.deta1;
      dx.segment(b_eta2_ * dim_, dim_) = r.deta2;
      out.gamma = spec_.tracking_law ? spec_.tracking_law(p, v, r.v_r, r.dv_r)
                                     : gamma_nonlinear_vs(p, v, r.v_r, r.dv_r, g, *drift_);
      out.tracking_error = v - r.v_r;
      out.reference_accel = r.dv_r;
      break;
    }
    case ControlVariant::OscillatorFull:
    case ControlVariant::OscillatorOutput: {
      const auto est = average_flow_estimate(nb, t, dim_, *flows_);
      Vec psi1 = p0_;
      Vec psi2 = vh;
      if (est) {
        psi1 = est->head(dim_);
        psi2 = est->segment(dim_, dim_);
      }
      const Vec sigma = get(x, b_sigma_);
      OscillatorTerms terms;
      if (spec_.variant == ControlVariant::OscillatorFull) {
        terms = gamma_oscillator_full(p, v, vh, sigma, psi1, psi2, g, model_.s1, model_.s2);
      } else {
        terms = gamma_oscillator_output(p, get(x, b_phi_), vh, sigma, psi1, psi2, g, model_.s1,
                                        model_.s2);
        dx.segment(b_phi_ * dim_, dim_) = terms.dphi;
      }
      dx.segment(b_vhat_ * dim_, dim_) = terms.dvhat;
      dx.segment(b_sigma_ * dim_, dim_) = terms.dsigma;
      out.gamma = terms.gamma;
      break;
    }
  }
}

std::map<std::string, Vec> unpack_internal(const FollowerController& c,
                                           const Eigen::VectorXd& internal) {
  if (internal.size() != c.internal_size()) {
    throw std::invalid_argument("unpack_internal: size mismatch");
  }
  std::map<std::string, Vec> out;
  const auto& labels = c.internal_labels();
  for (std::size_t b = 0; b < labels.size(); ++b) {
    out[labels[b]] = internal.segment(static_cast<Eigen::Index>(b) * c.dim(), c.dim());
  }
  return out;
}

Eigen::VectorXd pack_internal(const FollowerController& c,
                              const std::map<std::string, Vec>& blocks) {
  Eigen::VectorXd x(c.internal_size());
  const auto& labels = c.internal_labels();
  if (blocks.size() != labels.size()) throw std::invalid_argument("pack_internal: block count");
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const Vec& value = blocks.at(labels[b]);
    if (value.size() != c.dim()) throw std::invalid_argument("pack_internal: block size");
    x.segment(static_cast<Eigen::Index>(b) * c.dim(), c.dim()) = value;
  }
  return x;
}

}  // namespace containment
