#include "containment/sim.h"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "containment/hull.h"

namespace containment {
namespace {

constexpr double kGridTol = 1e-9;

bool on_grid(double value, double step) {
  const double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) < kGridTol * std::max(1.0, std::abs(ratio));
}

std::int64_t grid_count(double value, double step) {
  return static_cast<std::int64_t>(std::llround(value / step));
}

}  // namespace

std::int64_t Scenario::steps() const { return grid_count(t_end, dt); }

void Scenario::validate() const {
  const DirectedTopology topo = topology();
  const auto reach = validate_reachability(topo);
  if (!reach.satisfied) {
    std::string ids;
    for (int i : reach.unreachable) ids += " " + std::to_string(i + 1);
    throw ConfigError("topology: followers not reachable from any leader:" + ids);
  }
  if (dim < 1 || dim > kMaxDimension) {
    throw ConfigError("dimension N must lie in [1, " + std::to_string(kMaxDimension) + "]");
  }
  if (static_cast<int>(agents.size()) != topo.agents()) {
    throw ConfigError("agent list size does not match the weight matrix");
  }
  if (static_cast<int>(controllers.size()) != followers) {
    throw ConfigError("expected one controller per follower");
  }
  comm.validate();
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("sim: dt and t_end must be > 0");
  if (!on_grid(comm.sampling_period, dt)) throw ConfigError("sim: dt must divide T exactly");
  if (dt > comm.sampling_period / 10.0 + kGridTol) throw ConfigError("sim: dt must be <= T / 10");
  if (comm.delay_quantum > 0.0 && !on_grid(comm.delay_quantum, dt)) {
    throw ConfigError("sim: delay quantum must be a multiple of dt");
  }
  if (!(record_interval > 0.0) || !on_grid(record_interval, dt)) {
    throw ConfigError("sim: record interval must be a positive multiple of dt");
  }
  if (!on_grid(t_end, dt)) throw ConfigError("sim: t_end must be a multiple of dt");

  for (int i = 0; i < topo.agents(); ++i) {
    const auto& a = agents[static_cast<std::size_t>(i)];
    const std::string who = "agent " + std::to_string(i + 1) + ": ";
    if (a.model.dim != dim) throw ConfigError(who + "model dimension differs from N");
    if (a.model.kind == ModelKind::Oscillator) {
      const auto spectrum = check_oscillator_spectrum(a.model.s1, a.model.s2);
      if (!spectrum.pass) throw ConfigError(who + "oscillator spectrum: " + spectrum.diagnostic);
    }
    if (topo.is_leader(i)) {
      if (!a.trajectory) throw ConfigError(who + "leader needs a trajectory");
      const auto& tr = *a.trajectory;
      if (tr.p0.size() != dim) throw ConfigError(who + "initial position must have size N");
      if ((tr.kind == LeaderKind::DampedWave || tr.kind == LeaderKind::ConstantVelocity) &&
          tr.v_d.size() != dim) {
        throw ConfigError(who + "trajectory needs v_d of size N");
      }
      if (tr.kind == LeaderKind::OscillatorFree) {
        if (tr.v0.size() != dim) throw ConfigError(who + "initial velocity must have size N");
        if (tr.s1.rows() != dim || tr.s2.rows() != dim) {
          throw ConfigError(who + "oscillator trajectory needs S1, S2 of size N");
        }
      }
    } else {
      if (a.p0.size() != dim || a.v0.size() != dim) {
        throw ConfigError(who + "initial p and v must have size N");
      }
      const auto& c = controllers[static_cast<std::size_t>(i)];
      if (model_for_variant(c.variant) != a.model.kind) {
        throw ConfigError(who + "controller " + to_string(c.variant) + " cannot drive a " +
                          to_string(a.model.kind) + " model");
      }
      const Eigen::MatrixXd* s2 = a.model.kind == ModelKind::Oscillator ? &a.model.s2 : nullptr;
      const auto gains = check_gains(c.variant, c.psi_mode, c.gains, s2);
      if (!gains.pass) {
        std::string msg = who + "gains rejected:";
        for (const auto& d : gains.diagnostics) msg += " " + d + ";";
        throw ConfigError(msg);
      }
    }
  }
}

ContainmentError containment_error(const Eigen::MatrixXd& w, const std::vector<Vec>& positions,
                                   int followers) {
  const auto dim = positions.front().size();
  const auto leaders = static_cast<Eigen::Index>(positions.size()) - followers;
  ContainmentError out;
  out.stacked.resize(followers * dim);
  for (int i = 0; i < followers; ++i) {
    Vec target = Vec::Zero(dim);
    for (Eigen::Index l = 0; l < leaders; ++l) {
      target += w(i, l) * positions[static_cast<std::size_t>(followers + l)];
    }
    out.stacked.segment(i * dim, dim) = positions[static_cast<std::size_t>(i)] - target;
  }
  out.norm = out.stacked.norm();
  return out;
}

const TraceSample& sample_at(const Trace& trace, double t) {
  for (const auto& s : trace.samples) {
    if (std::abs(s.t - t) <= 0.5 * trace.dt) return s;
  }
  throw std::out_of_range("no recorded sample at t = " + std::to_string(t));
}

ContainmentError containment_error(const Trace& trace, double t) {
  return containment_error(trace.containment_weights, sample_at(trace, t).p, trace.followers);
}

namespace {

// Closed-loop right-hand side over the stacked state
// [p_0, v_0, ..., p_{n-1}, v_{n-1}, internal_0, ..., internal_{m-1}].
class ClosedLoop {
 public:
  ClosedLoop(const Scenario& sc, const DirectedTopology& topo, const Mailboxes& mailboxes)
      : sc_(sc), n_(topo.agents()), m_(topo.followers()), dim_(sc.dim) {
    for (int i = 0; i < m_; ++i) {
      controllers_.push_back(std::make_unique<FollowerController>(
          sc.controllers[static_cast<std::size_t>(i)], sc.agents[static_cast<std::size_t>(i)].model,
          sc.dt));
      const auto& model = sc.agents[static_cast<std::size_t>(i)].model;
      drifts_.push_back(model.kind == ModelKind::NonlinearFollower
                            ? &drift_by_name(model.drift_name)
                            : nullptr);
    }
    std::int64_t offset = 2 * static_cast<std::int64_t>(n_) * dim_;
    for (const auto& c : controllers_) {
      internal_offset_.push_back(offset);
      offset += c->internal_size();
    }
    size_ = offset;
    neighborhoods_.resize(static_cast<std::size_t>(m_));
    edge_slots_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      neighborhoods_[static_cast<std::size_t>(i)].kappa = topo.in_degree(i);
      for (int j : topo.in_neighbors(i)) {
        neighborhoods_[static_cast<std::size_t>(i)].samples.push_back({topo.weight(i, j), nullptr});
        edge_slots_[static_cast<std::size_t>(i)].push_back(mailboxes.edge_index(Edge{j, i}));
      }
    }
    outputs_.resize(static_cast<std::size_t>(m_));
    accel_.resize(static_cast<std::size_t>(m_));
  }

  Eigen::Index size() const { return size_; }
  FollowerController& controller(int i) { return *controllers_[static_cast<std::size_t>(i)]; }
  Eigen::Index internal_offset(int i) const { return internal_offset_[static_cast<std::size_t>(i)]; }

  Eigen::VectorXd initial_state() {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(size_);
    for (int i = 0; i < n_; ++i) {
      const auto& a = sc_.agents[static_cast<std::size_t>(i)];
      if (i >= m_) {
        x.segment(p_at(i), dim_) = a.trajectory->initial_position();
        x.segment(v_at(i), dim_) = a.trajectory->initial_velocity();
      } else {
        x.segment(p_at(i), dim_) = a.p0;
        x.segment(v_at(i), dim_) = a.v0;
        auto& c = controller(i);
        x.segment(internal_offset(i), c.internal_size()) = c.initial_internal(a.p0, a.v0);
      }
    }
    return x;
  }

  /// Points every neighbor sample at the current mailbox contents.
  void bind(const Mailboxes& mailboxes) {
    for (int i = 0; i < m_; ++i) {
      auto& nb = neighborhoods_[static_cast<std::size_t>(i)];
      const auto& slots = edge_slots_[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < slots.size(); ++k) {
        const auto& slot = mailboxes.slot(slots[k]);
        nb.samples[k].msg = slot ? &*slot : nullptr;
      }
    }
  }

  /// First follower (zero-based) with an in-edge that has never delivered, or -1.
  int first_starved_follower() const {
    for (int i = 0; i < m_; ++i) {
      for (const auto& s : neighborhoods_[static_cast<std::size_t>(i)].samples) {
        if (s.msg == nullptr) return i;
      }
    }
    return -1;
  }

  void eval(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    for (int i = 0; i < n_; ++i) {
      const Vec p = x.segment(p_at(i), dim_);
      const Vec v = x.segment(v_at(i), dim_);
      dx.segment(p_at(i), dim_) = v;
      if (i >= m_) {
        dx.segment(v_at(i), dim_) = sc_.agents[static_cast<std::size_t>(i)].trajectory->accel(t, p, v);
        continue;
      }
      auto& c = controller(i);
      auto& out = outputs_[static_cast<std::size_t>(i)];
      const auto off = internal_offset(i);
      const auto len = c.internal_size();
      c.evaluate(t, p, v, x.segment(off, len), neighborhoods_[static_cast<std::size_t>(i)],
                 dx.segment(off, len), out);
      if (!sc_.controllers_enabled) {
        out.gamma = Vec::Zero(dim_);
        dx.segment(off, len).setZero();
      }
      const auto& model = sc_.agents[static_cast<std::size_t>(i)].model;
      Vec accel;
      switch (model.kind) {
        case ModelKind::DoubleIntegrator:
          accel = out.gamma;
          break;
        case ModelKind::NonlinearFollower:
          accel = drifts_[static_cast<std::size_t>(i)]->f(p, v) + out.gamma;
          break;
        case ModelKind::Oscillator:
          accel = model.s1 * p + model.s2 * v + out.gamma;
          break;
      }
      dx.segment(v_at(i), dim_) = accel;
      accel_[static_cast<std::size_t>(i)] = accel;
    }
  }

  Vec payload(int i, const Eigen::VectorXd& x) const {
    Vec out(2 * dim_);
    if (i >= m_) {
      out << x.segment(p_at(i), dim_), x.segment(v_at(i), dim_);
      return out;
    }
    const auto& c = *controllers_[static_cast<std::size_t>(i)];
    return c.payload(x.segment(p_at(i), dim_), x.segment(internal_offset(i), c.internal_size()));
  }

  const ControlOutput& output(int i) const { return outputs_[static_cast<std::size_t>(i)]; }
  const Vec& accel(int i) const { return accel_[static_cast<std::size_t>(i)]; }
  Eigen::Index p_at(int i) const { return 2 * static_cast<Eigen::Index>(i) * dim_; }
  Eigen::Index v_at(int i) const { return p_at(i) + dim_; }

 private:
  const Scenario& sc_;
  int n_;
  int m_;
  int dim_;
  Eigen::Index size_ = 0;
  std::vector<std::unique_ptr<FollowerController>> controllers_;
  std::vector<const Drift*> drifts_;
  std::vector<Eigen::Index> internal_offset_;
  std::vector<Neighborhood> neighborhoods_;
  std::vector<std::vector<int>> edge_slots_;
  std::vector<ControlOutput> outputs_;
  std::vector<Vec> accel_;
};

void guard(const Eigen::VectorXd& x, double t, int n, int dim) {
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || std::abs(x[k]) > kDivergenceThreshold) {
      const auto block = k / (2 * dim);
      const int agent = block < n ? static_cast<int>(block) : -1;
      std::string what = "state diverged at t = " + std::to_string(t);
      if (agent >= 0) what += " (agent " + std::to_string(agent + 1) + ")";
      throw DivergenceError(what, t, agent);
    }
  }
}

}  // namespace

Trace run(const Scenario& sc, std::uint64_t seed) {
  const auto wall_start = std::chrono::steady_clock::now();
  sc.validate();
  const DirectedTopology topo = sc.topology();
  const int n = topo.agents();
  const int m = topo.followers();
  const int dim = sc.dim;

  CommConfig comm = sc.comm;
  comm.seed = seed;
  std::vector<LinkSchedule> schedules;
  for (const Edge& e : topo.edges()) schedules.push_back(generate_schedule(e, comm, sc.t_end));
  Network network(schedules, sc.dt);

  Trace trace;
  trace.scenario = sc.name;
  trace.dim = dim;
  trace.followers = m;
  trace.agents = n;
  trace.seed = seed;
  trace.dt = sc.dt;
  trace.containment_weights = containment_weights(partition(topo)).w;
  trace.schedules = schedules;

  ClosedLoop loop(sc, topo, network.mailboxes());
  for (int i = 0; i < m; ++i) trace.internal_labels.push_back(loop.controller(i).internal_labels());

  const std::int64_t total = sc.steps();
  const std::int64_t per_sample = grid_count(comm.sampling_period, sc.dt);
  const std::int64_t last_seq = static_cast<std::int64_t>(
      std::floor(sc.t_end / comm.sampling_period + kGridTol));
  const std::int64_t per_record = grid_count(sc.record_interval, sc.dt);
  const Eigen::MatrixXd& w = trace.containment_weights;

  PayloadHistory history(n);
  const PayloadSource source = history.source();

  Eigen::VectorXd x = loop.initial_state();
  Eigen::VectorXd k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), tmp(x.size());

  auto record = [&](double t) {
    TraceSample s;
    s.t = t;
    std::vector<Vec> leader_p;
    for (int i = 0; i < n; ++i) {
      s.p.push_back(x.segment(loop.p_at(i), dim));
      s.v.push_back(x.segment(loop.v_at(i), dim));
      if (i >= m) {
        s.gamma.push_back(k1.segment(loop.v_at(i), dim));
        s.vhat.push_back(s.v.back());
        leader_p.push_back(s.p.back());
      } else {
        const auto& c = loop.controller(i);
        const auto internal = x.segment(loop.internal_offset(i), c.internal_size());
        s.gamma.push_back(loop.output(i).gamma);
        s.vhat.push_back(c.vhat(internal));
        s.internal.push_back(internal);
        s.observer_error.push_back(c.observer_error(s.p.back(), s.v.back(), internal));
        const auto& out = loop.output(i);
        if (out.tracking_error.size() > 0) {
          const Vec& e = out.tracking_error;
          s.lyapunov.push_back(0.5 * e.squaredNorm());
          s.lyapunov_rate.push_back(e.dot(loop.accel(i) - out.reference_accel));
        } else {
          s.lyapunov.push_back(std::numeric_limits<double>::quiet_NaN());
          s.lyapunov_rate.push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
    }
    s.pos_error = containment_error(w, s.p, m).stacked;
    s.vel_error = containment_error(w, s.v, m).stacked;
    std::vector<Vec> vh(s.vhat.begin(), s.vhat.begin() + m);
    vh.insert(vh.end(), s.v.begin() + m, s.v.end());
    s.vhat_error = containment_error(w, vh, m).stacked;
    for (int i = 0; i < m; ++i) s.hull.push_back(hull_distance(s.p[static_cast<std::size_t>(i)], leader_p));
    for (std::size_t e = 0; e < network.mailboxes().edges().size(); ++e) {
      const auto& slot = network.mailboxes().slot(static_cast<int>(e));
      s.mailbox_seq.push_back(slot ? slot->seq : -1);
    }
    trace.samples.push_back(std::move(s));
  };

  for (std::int64_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * sc.dt;
    if (step % per_sample == 0) {
      const std::int64_t seq = step / per_sample;
      if (seq <= last_seq) {
        for (int i = 0; i < n; ++i) history.record(i, seq, loop.payload(i, x));
      }
    }
    network.advance_to_step(step, source, &trace.audit);
    loop.bind(network.mailboxes());
    if (t > sc.comm.blackout_bound + sc.dt) {
      const int starved = loop.first_starved_follower();
      if (starved >= 0) {
        throw SchedulerError("follower " + std::to_string(starved + 1) +
                             " has an in-edge with no delivery after T*");
      }
    }

    loop.eval(t, x, k1);
    if (step % per_record == 0 || step == total) record(t);
    if (step == total) break;

    const double h = sc.dt;
    tmp = x + 0.5 * h * k1;
    loop.eval(t + 0.5 * h, tmp, k2);
    tmp = x + 0.5 * h * k2;
    loop.eval(t + 0.5 * h, tmp, k3);
    tmp = x + h * k3;
    loop.eval(t + h, tmp, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    guard(x, t + h, n, dim);
  }

  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return trace;
}

}  // namespace containment
