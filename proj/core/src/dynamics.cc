#include "containment/dynamics.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "containment/linalg.h"

namespace containment {
namespace {

const std::map<std::string, Drift>& drift_registry() {
  static const std::map<std::string, Drift> registry = [] {
    std::map<std::string, Drift> r;
    r["zero"] = Drift{"zero", [](const Vec& p, const Vec&) { return Vec(Vec::Zero(p.size())); },
                      [](double) { return 0.0; }, [](double) { return 0.0; }};
    r["square_velocity"] =
        Drift{"square_velocity", [](const Vec&, const Vec& v) { return Vec(v.cwiseAbs2()); },
              [](double) { return 0.0; }, [](double s) { return s * s; }};
    return r;
  }();
  return registry;
}

void require_dim(const Vec& x, int dim, const char* what) {
  if (x.size() != dim) {
    throw std::invalid_argument(std::string("dimension mismatch for ") + what + ": expected " +
                                std::to_string(dim) + ", got " + std::to_string(x.size()));
  }
}

}  // namespace

const Drift& drift_by_name(const std::string& name) {
  const auto& registry = drift_registry();
  const auto it = registry.find(name);
  if (it == registry.end()) throw ConfigError("unknown drift '" + name + "'");
  return it->second;
}

std::vector<std::string> drift_names() {
  std::vector<std::string> names;
  for (const auto& [name, drift] : drift_registry()) names.push_back(name);
  return names;
}

AgentModel AgentModel::double_integrator(int dim) {
  AgentModel m;
  m.kind = ModelKind::DoubleIntegrator;
  m.dim = dim;
  return m;
}

AgentModel AgentModel::nonlinear(int dim, const std::string& drift) {
  drift_by_name(drift);
  AgentModel m;
  m.kind = ModelKind::NonlinearFollower;
  m.dim = dim;
  m.drift_name = drift;
  return m;
}

AgentModel AgentModel::oscillator(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
  if (s1.rows() != s1.cols() || s2.rows() != s2.cols() || s1.rows() != s2.rows()) {
    throw ConfigError("oscillator: S1 and S2 must be square and of equal size");
  }
  AgentModel m;
  m.kind = ModelKind::Oscillator;
  m.dim = static_cast<int>(s1.rows());
  m.s1 = s1;
  m.s2 = s2;
  return m;
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::DoubleIntegrator: return "double_integrator";
    case ModelKind::NonlinearFollower: return "nonlinear";
    case ModelKind::Oscillator: return "oscillator";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "double_integrator") return ModelKind::DoubleIntegrator;
  if (name == "nonlinear") return ModelKind::NonlinearFollower;
  if (name == "oscillator") return ModelKind::Oscillator;
  throw ConfigError("unknown model '" + name + "'");
}

Vec follower_accel(const AgentModel& model, const Vec& p, const Vec& v, const Vec& gamma) {
  require_dim(p, model.dim, "p");
  require_dim(v, model.dim, "v");
  require_dim(gamma, model.dim, "gamma");
  switch (model.kind) {
    case ModelKind::DoubleIntegrator:
      return gamma;
    case ModelKind::NonlinearFollower:
      return drift_by_name(model.drift_name).f(p, v) + gamma;
    case ModelKind::Oscillator:
      return model.s1 * p + model.s2 * v + gamma;
  }
  return gamma;
}

StateDerivative follower_rhs(const AgentModel& model, const Vec& p, const Vec& v,
                             const Vec& gamma) {
  return StateDerivative{v, follower_accel(model, p, v, gamma)};
}

double drift_bound_slack(const Drift& drift, int dim, int samples, double radius,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  double worst = -std::numeric_limits<double>::infinity();
  Vec p(dim);
  Vec v(dim);
  for (int s = 0; s < samples; ++s) {
    for (int k = 0; k < dim; ++k) {
      p[k] = coord(rng);
      v[k] = coord(rng);
    }
    const double lhs = drift.f(p, v).norm();
    const double rhs = drift.bound_p(p.norm()) + drift.bound_v(v.norm());
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

namespace {

double sign_scale(int index) { return (index % 2 == 0 ? 1.0 : -1.0) * index; }

}  // namespace

double damped_wave_velocity_offset(int index, double t) {
  return sign_scale(index) * (std::cos(t) - 0.2 * std::sin(t)) * std::exp(-0.2 * t);
}

double damped_wave_accel(int index, double t) {
  return sign_scale(index) * (-0.96 * std::sin(t) - 0.4 * std::cos(t)) * std::exp(-0.2 * t);
}

double damped_wave_position_offset(int index, double t) {
  return sign_scale(index) * std::sin(t) * std::exp(-0.2 * t);
}

std::string to_string(LeaderKind kind) {
  switch (kind) {
    case LeaderKind::DampedWave: return "damped_wave";
    case LeaderKind::ConstantVelocity: return "constant_velocity";
    case LeaderKind::Stationary: return "stationary";
    case LeaderKind::OscillatorFree: return "oscillator_free";
  }
  return "unknown";
}

LeaderKind leader_kind_from_string(const std::string& name) {
  if (name == "damped_wave") return LeaderKind::DampedWave;
  if (name == "constant_velocity") return LeaderKind::ConstantVelocity;
  if (name == "stationary") return LeaderKind::Stationary;
  if (name == "oscillator_free") return LeaderKind::OscillatorFree;
  throw ConfigError("unknown leader trajectory '" + name + "'");
}

Vec LeaderTrajectory::initial_velocity() const { return velocity(0.0); }

Vec LeaderTrajectory::accel(double t, const Vec& p, const Vec& v) const {
  switch (kind) {
    case LeaderKind::DampedWave:
      return Vec::Constant(p0.size(), damped_wave_accel(index, t));
    case LeaderKind::ConstantVelocity:
    case LeaderKind::Stationary:
      return Vec::Zero(p0.size());
    case LeaderKind::OscillatorFree:
      return s1 * p + s2 * v;
  }
  return Vec::Zero(p0.size());
}

Vec LeaderTrajectory::position(double t) const {
  switch (kind) {
    case LeaderKind::DampedWave:
      return p0 + v_d * t + Vec::Constant(p0.size(), damped_wave_position_offset(index, t));
    case LeaderKind::ConstantVelocity:
      return p0 + v_d * t;
    case LeaderKind::Stationary:
      return p0;
    case LeaderKind::OscillatorFree: {
      const auto dim = p0.size();
      Eigen::VectorXd x(2 * dim);
      x << p0, v0;
      return oscillator_flow(oscillator_matrix(s1, s2), t).topRows(dim) * x;
    }
  }
  return p0;
}

Vec LeaderTrajectory::velocity(double t) const {
  switch (kind) {
    case LeaderKind::DampedWave:
      return v_d + Vec::Constant(p0.size(), damped_wave_velocity_offset(index, t));
    case LeaderKind::ConstantVelocity:
      return v_d;
    case LeaderKind::Stationary:
      return Vec::Zero(p0.size());
    case LeaderKind::OscillatorFree: {
      const auto dim = p0.size();
      Eigen::VectorXd x(2 * dim);
      x << p0, v0;
      return oscillator_flow(oscillator_matrix(s1, s2), t).bottomRows(dim) * x;
    }
  }
  return Vec::Zero(p0.size());
}

Eigen::MatrixXd oscillator_matrix(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
  const auto n = s1.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  s.topRightCorner(n, n).setIdentity();
  s.bottomLeftCorner(n, n) = s1;
  s.bottomRightCorner(n, n) = s2;
  return s;
}

SpectrumReport check_oscillator_spectrum(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
  constexpr double kImagAxisTol = 1e-9;
  constexpr double kClusterTol = 1e-6;
  constexpr double kRankTol = 1e-7;

  SpectrumReport report;
  if (s1.rows() != s1.cols() || s2.rows() != s2.cols() || s1.rows() != s2.rows()) {
    report.diagnostic = "S1 and S2 must be square and of equal size";
    return report;
  }
  const Eigen::MatrixXd s = oscillator_matrix(s1, s2);
  report.eigenvalues = eigenvalues(s);
  const auto& ev = report.eigenvalues;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev[k].real()) >= kImagAxisTol) {
      report.diagnostic = "eigenvalue off the imaginary axis (Re = " +
                          std::to_string(ev[k].real()) + ")";
      return report;
    }
  }
  // Semisimplicity: for each cluster of equal eigenvalues, the null space of
  // S - lambda I must have dimension equal to the cluster size.
  const auto n = s.rows();
  std::vector<bool> seen(static_cast<std::size_t>(ev.size()), false);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (seen[static_cast<std::size_t>(k)]) continue;
    int multiplicity = 0;
    std::complex<double> center = 0.0;
    for (Eigen::Index j = k; j < ev.size(); ++j) {
      if (!seen[static_cast<std::size_t>(j)] && std::abs(ev[j] - ev[k]) < kClusterTol) {
        seen[static_cast<std::size_t>(j)] = true;
        center += ev[j];
        ++multiplicity;
      }
    }
    center /= static_cast<double>(multiplicity);
    // Snap to the imaginary axis; defective blocks perturb the real part.
    center = std::complex<double>(0.0, center.imag());
    const Eigen::MatrixXcd shifted =
        s.cast<std::complex<double>>() - center * Eigen::MatrixXcd::Identity(n, n);
    const int geometric = static_cast<int>(n) - numerical_rank(shifted, kRankTol);
    if (geometric != multiplicity) {
      report.diagnostic = "eigenvalue " + std::to_string(center.imag()) +
                          "i is not semisimple (algebraic " + std::to_string(multiplicity) +
                          ", geometric " + std::to_string(geometric) + ")";
      return report;
    }
  }
  report.pass = true;
  return report;
}

Eigen::MatrixXd oscillator_flow(const Eigen::MatrixXd& s, double dt) { return expm(s * dt); }

OscillatorFlowCache::OscillatorFlowCache(Eigen::MatrixXd s, double resolution)
    : s_(std::move(s)), resolution_(resolution) {
  if (!(resolution_ > 0.0)) throw std::invalid_argument("flow cache: resolution must be > 0");
}

const Eigen::MatrixXd& OscillatorFlowCache::flow(double dt) {
  const double ticks = dt / resolution_;
  const auto key = static_cast<std::int64_t>(std::llround(ticks));
  if (std::abs(ticks - static_cast<double>(key)) > 1e-6) {
    throw std::invalid_argument("flow cache: dt is not on the cache grid");
  }
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, oscillator_flow(s_, static_cast<double>(key) * resolution_)).first;
  }
  return it->second;
}

}  // namespace containment
