#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "containment/comm.h"
#include "containment/control.h"
#include "containment/dynamics.h"
#include "containment/topology.h"
#include "containment/types.h"

namespace containment {

inline constexpr double kDivergenceThreshold = 1e9;

struct AgentSpec {
  AgentModel model;
  Vec p0;  // followers
  Vec v0;
  std::optional<LeaderTrajectory> trajectory;  // leaders
};

/// Everything a run needs. Agents 0..m-1 are followers, m..n-1 leaders;
/// `controllers[i]` drives follower i.
struct Scenario {
  std::string name;
  int dim = 2;
  Eigen::MatrixXd weights;
  int followers = 0;
  std::vector<AgentSpec> agents;
  std::vector<ControllerSpec> controllers;
  CommConfig comm;
  double dt = 0.01;
  double t_end = 10.0;
  double record_interval = 0.1;
  /// When false every follower input is zero; used to test the integrator.
  bool controllers_enabled = true;

  DirectedTopology topology() const { return DirectedTopology(weights, followers); }
  std::int64_t steps() const;

  /// Throws ConfigError on any inconsistency: topology invariants and
  /// reachability, agent and controller counts, model/variant pairing,
  /// dimensions, gains, oscillator spectrum, dt dividing T, dt <= T / 10,
  /// and delay quantum / record interval / horizon on the dt grid.
  void validate() const;
};

struct TraceSample {
  double t = 0.0;
  std::vector<Vec> p;      // per agent
  std::vector<Vec> v;
  std::vector<Vec> gamma;  // leaders: acceleration
  std::vector<Vec> vhat;   // leaders: true velocity
  std::vector<Eigen::VectorXd> internal;  // per follower
  std::vector<Vec> observer_error;        // per follower; empty when not applicable
  Eigen::VectorXd pos_error;   // p_F - (W kron I) p_L
  Eigen::VectorXd vel_error;   // v_F - (W kron I) v_L
  Eigen::VectorXd vhat_error;  // vhat_F - (W kron I) v_L
  std::vector<double> hull;    // per follower distance to the leader hull
  std::vector<double> lyapunov;       // per follower 0.5 |e|^2, NaN when not defined
  std::vector<double> lyapunov_rate;  // its time derivative along the closed loop
  std::vector<std::int64_t> mailbox_seq;  // per edge, -1 while empty
};

struct Trace {
  std::string scenario;
  int dim = 2;
  int followers = 0;
  int agents = 0;
  std::uint64_t seed = 0;
  double dt = 0.0;
  Eigen::MatrixXd containment_weights;  // W
  std::vector<std::vector<std::string>> internal_labels;
  std::vector<LinkSchedule> schedules;
  std::vector<Delivery> audit;
  std::vector<TraceSample> samples;
  double wall_seconds = 0.0;
};

/// Fixed-step RK4 closed loop. Mailboxes are frozen within a step; arrivals
/// are applied between steps and payloads are captured at sampling steps.
/// Throws DivergenceError at the first non-finite or oversized state.
Trace run(const Scenario& scenario, std::uint64_t seed);

struct ContainmentError {
  Eigen::VectorXd stacked;
  double norm = 0.0;
};

/// p_F - (W kron I) p_L for positions stacked per agent.
ContainmentError containment_error(const Eigen::MatrixXd& w, const std::vector<Vec>& positions,
                                   int followers);

/// Error at recorded time t; throws std::out_of_range off the record grid.
ContainmentError containment_error(const Trace& trace, double t);

const TraceSample& sample_at(const Trace& trace, double t);

}  // namespace containment
