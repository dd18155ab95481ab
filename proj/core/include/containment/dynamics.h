#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "containment/types.h"

namespace containment {

enum class ModelKind { DoubleIntegrator, NonlinearFollower, Oscillator };

/// Drift term of a nonlinear follower together with class-K-infinity bounds
/// delta_p(|p|) + delta_v(|v|) on its norm.
struct Drift {
  std::string name;
  std::function<Vec(const Vec& p, const Vec& v)> f;
  std::function<double(double)> bound_p;
  std::function<double(double)> bound_v;
};

/// Registered drifts: "zero" and "square_velocity" (componentwise v_k^2,
/// bounded by |v|^2).
const Drift& drift_by_name(const std::string& name);  // throws ConfigError
std::vector<std::string> drift_names();

struct AgentModel {
  ModelKind kind = ModelKind::DoubleIntegrator;
  int dim = 2;
  std::string drift_name;  // NonlinearFollower only
  Eigen::MatrixXd s1;      // Oscillator only, dim x dim
  Eigen::MatrixXd s2;

  static AgentModel double_integrator(int dim);
  static AgentModel nonlinear(int dim, const std::string& drift);
  static AgentModel oscillator(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2);
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);  // throws ConfigError

/// Returns dv; dp is v for every model. Throws std::invalid_argument on a
/// dimension mismatch.
Vec follower_accel(const AgentModel& model, const Vec& p, const Vec& v, const Vec& gamma);

struct StateDerivative {
  Vec dp;
  Vec dv;
};
StateDerivative follower_rhs(const AgentModel& model, const Vec& p, const Vec& v, const Vec& gamma);

/// Largest value of |F(p, v)| - bound over `samples` random points with
/// coordinates in [-radius, radius]; nonpositive when the bound holds there.
double drift_bound_slack(const Drift& drift, int dim, int samples, double radius,
                         std::uint64_t seed);

/// Velocity offset of leader `index` (one-based, as used in the leader
/// motion formula): 1 (-1)^i i (cos t - 0.2 sin t) e^{-0.2 t}, per component.
double damped_wave_velocity_offset(int index, double t);
/// Time derivative of the offset above.
double damped_wave_accel(int index, double t);
/// Antiderivative of the offset with value 0 at t = 0.
double damped_wave_position_offset(int index, double t);

enum class LeaderKind { DampedWave, ConstantVelocity, Stationary, OscillatorFree };

std::string to_string(LeaderKind kind);
LeaderKind leader_kind_from_string(const std::string& name);  // throws ConfigError

struct LeaderTrajectory {
  LeaderKind kind = LeaderKind::Stationary;
  Vec p0;
  Vec v_d;    // limit velocity (DampedWave, ConstantVelocity)
  Vec v0;     // OscillatorFree initial velocity
  int index = 0;  // one-based index in the damped wave offset
  Eigen::MatrixXd s1;  // OscillatorFree
  Eigen::MatrixXd s2;

  Vec initial_position() const { return p0; }
  Vec initial_velocity() const;
  /// Leader acceleration at (t, p, v). Only OscillatorFree depends on the state.
  Vec accel(double t, const Vec& p, const Vec& v) const;
  /// Closed-form state where available (all kinds except OscillatorFree,
  /// which uses the flow of S).
  Vec position(double t) const;
  Vec velocity(double t) const;
};

/// S = [[0, I], [S1, S2]].
Eigen::MatrixXd oscillator_matrix(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2);

struct SpectrumReport {
  bool pass = false;
  Eigen::VectorXcd eigenvalues;
  std::string diagnostic;
};

/// All eigenvalues of S on the imaginary axis (|Re| < 1e-9) and semisimple.
SpectrumReport check_oscillator_spectrum(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2);

/// e^{S dt}.
Eigen::MatrixXd oscillator_flow(const Eigen::MatrixXd& s, double dt);

/// e^{S dt} memoized on dt rounded to multiples of `resolution`. Not
/// thread-safe; one cache per simulation run.
class OscillatorFlowCache {
 public:
  OscillatorFlowCache(Eigen::MatrixXd s, double resolution);

  const Eigen::MatrixXd& s() const { return s_; }
  const Eigen::MatrixXd& flow(double dt);
  std::size_t size() const { return cache_.size(); }

 private:
  Eigen::MatrixXd s_;
  double resolution_;
  std::map<std::int64_t, Eigen::MatrixXd> cache_;
};

}  // namespace containment
