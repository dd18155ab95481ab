#include "containment/analysis.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace containment {

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::Zero: return "zero";
    case PerturbationKind::Constant: return "constant";
    case PerturbationKind::Sinusoid: return "sinusoid";
    case PerturbationKind::DecayingExp: return "decaying_exp";
  }
  return "unknown";
}

PerturbationKind perturbation_kind_from_string(const std::string& name) {
  for (auto k : {PerturbationKind::Zero, PerturbationKind::Constant, PerturbationKind::Sinusoid,
                 PerturbationKind::DecayingExp}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown perturbation '" + name + "'");
}

Vec Perturbation::value(double t, int dim) const {
  switch (kind) {
    case PerturbationKind::Zero: return Vec::Zero(dim);
    case PerturbationKind::Constant: return amplitude;
    case PerturbationKind::Sinusoid: return amplitude * std::sin(omega * t + phase);
    case PerturbationKind::DecayingExp: return amplitude * std::exp(-rate * t);
  }
  return Vec::Zero(dim);
}

bool Perturbation::vanishing() const {
  return kind == PerturbationKind::Zero || kind == PerturbationKind::DecayingExp ||
         amplitude.isZero(0.0);
}

namespace {

bool on_grid(double value, double step) {
  const double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) < 1e-9 * std::max(1.0, std::abs(ratio));
}

void check_perturbation(const Perturbation& p, int dim, const std::string& who) {
  if (p.kind != PerturbationKind::Zero && p.amplitude.size() != dim) {
    throw ConfigError(who + ": perturbation amplitude must have size N");
  }
  if (p.kind == PerturbationKind::DecayingExp && !(p.rate > 0.0)) {
    throw ConfigError(who + ": decay rate must be > 0");
  }
}

}  // namespace

void CascadeSystem::validate() const {
  const DirectedTopology topo = topology();
  if (!validate_reachability(topo).satisfied) {
    throw ConfigError("cascade: some follower is not reachable from a leader");
  }
  const auto m = static_cast<std::size_t>(followers);
  const auto leaders = static_cast<std::size_t>(topo.leaders());
  if (dim < 1 || dim > kMaxDimension) throw ConfigError("cascade: invalid dimension");
  if (alpha != 0 && alpha != 1) throw ConfigError("cascade: alpha must be 0 or 1");
  if (k_eta.size() != m || h.size() != m || phi1.size() != m || phi2.size() != m) {
    throw ConfigError("cascade: per-follower lists must have one entry per follower");
  }
  if (psi.size() != leaders) throw ConfigError("cascade: need one Psi per leader");
  if (eta0.size() != m + leaders) throw ConfigError("cascade: need one eta0 per agent");
  if (!zeta0.empty() && zeta0.size() != m) throw ConfigError("cascade: zeta0 per follower");
  for (std::size_t i = 0; i < m; ++i) {
    const std::string who = "cascade follower " + std::to_string(i + 1);
    if (!(k_eta[i] > 0.0)) throw ConfigError(who + ": k_eta must be > 0");
    if (h[i].empty()) throw ConfigError(who + ": filter order must be >= 1");
    for (double hl : h[i]) {
      if (!(hl > 0.0)) throw ConfigError(who + ": filter gains must be > 0");
    }
    if (!zeta0.empty() && !zeta0[i].empty() && zeta0[i].size() != h[i].size()) {
      throw ConfigError(who + ": zeta0 needs one block per filter stage");
    }
    check_perturbation(phi1[i], dim, who);
    check_perturbation(phi2[i], dim, who);
  }
  for (std::size_t l = 0; l < leaders; ++l) {
    check_perturbation(psi[l], dim, "cascade leader " + std::to_string(m + l + 1));
  }
  for (const auto& e : eta0) {
    if (e.size() != dim) throw ConfigError("cascade: eta0 entries must have size N");
  }
  comm.validate();
  if (!(dt > 0.0) || !on_grid(comm.sampling_period, dt) || !on_grid(t_end, dt) ||
      !on_grid(record_interval, dt)) {
    throw ConfigError("cascade: T, t_end and record interval must be multiples of dt");
  }
  if (comm.delay_quantum > 0.0 && !on_grid(comm.delay_quantum, dt)) {
    throw ConfigError("cascade: delay quantum must be a multiple of dt");
  }
}

CascadeSystem CascadeSystem::with_gain_multiplier(double multiplier) const {
  CascadeSystem out = *this;
  for (auto& k : out.k_eta) k *= multiplier;
  for (auto& hs : out.h) {
    for (auto& hl : hs) hl *= multiplier;
  }
  return out;
}

namespace {

struct Layout {
  int n = 0;
  int m = 0;
  int dim = 0;
  std::vector<Eigen::Index> zeta_offset;  // per follower
  std::vector<int> order;                 // per follower, 0 when alpha = 0
  Eigen::Index size = 0;

  Eigen::Index eta(int i) const { return static_cast<Eigen::Index>(i) * dim; }
  Eigen::Index zeta(int i, int l) const {
    return zeta_offset[static_cast<std::size_t>(i)] + static_cast<Eigen::Index>(l) * dim;
  }
};

}  // namespace

CascadeTrace simulate_cascade(const CascadeSystem& sys, std::uint64_t seed) {
  sys.validate();
  const DirectedTopology topo = sys.topology();
  const int n = topo.agents();
  const int m = topo.followers();
  const int dim = sys.dim;
  const Eigen::MatrixXd w = containment_weights(partition(topo)).w;

  Layout lay;
  lay.n = n;
  lay.m = m;
  lay.dim = dim;
  Eigen::Index offset = static_cast<Eigen::Index>(n) * dim;
  for (int i = 0; i < m; ++i) {
    const int order = sys.alpha == 1 ? static_cast<int>(sys.h[static_cast<std::size_t>(i)].size()) : 0;
    lay.order.push_back(order);
    lay.zeta_offset.push_back(offset);
    offset += static_cast<Eigen::Index>(order) * dim;
  }
  lay.size = offset;

  CommConfig comm = sys.comm;
  comm.seed = seed;
  std::vector<LinkSchedule> schedules;
  for (const Edge& e : topo.edges()) schedules.push_back(generate_schedule(e, comm, sys.t_end));
  Network network(schedules, sys.dt);

  // Neighbor slots per follower.
  std::vector<std::vector<std::pair<double, int>>> in_edges(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int j : topo.in_neighbors(i)) {
      in_edges[static_cast<std::size_t>(i)].push_back(
          {topo.weight(i, j), network.mailboxes().edge_index(Edge{j, i})});
    }
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.size);
  for (int i = 0; i < n; ++i) x.segment(lay.eta(i), dim) = sys.eta0[static_cast<std::size_t>(i)];
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < lay.order[static_cast<std::size_t>(i)]; ++l) {
      if (!sys.zeta0.empty() && !sys.zeta0[static_cast<std::size_t>(i)].empty()) {
        x.segment(lay.zeta(i, l), dim) =
            sys.zeta0[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
      }
    }
  }

  // eps_i for the current mailbox contents; falls back to eta_i(t).
  auto epsilon = [&](int i, const Eigen::VectorXd& state) {
    Vec sum = Vec::Zero(dim);
    double weight = 0.0;
    for (const auto& [a, slot_index] : in_edges[static_cast<std::size_t>(i)]) {
      const auto& slot = network.mailboxes().slot(slot_index);
      if (!slot) continue;
      sum += a * slot->payload;
      weight += a;
    }
    if (weight <= 0.0) return Vec(state.segment(lay.eta(i), dim));
    return Vec(sum / weight);
  };

  auto eta_c = [&](int i, const Eigen::VectorXd& state) {
    Vec c = Vec::Zero(dim);
    for (int l = 0; l < n - m; ++l) c += w(i, l) * state.segment(lay.eta(m + l), dim);
    return c;
  };
  auto eta_c_dot = [&](int i, double t) {
    Vec c = Vec::Zero(dim);
    for (int l = 0; l < n - m; ++l) c += w(i, l) * sys.psi[static_cast<std::size_t>(l)].value(t, dim);
    return c;
  };

  auto rhs = [&](double t, const Eigen::VectorXd& s, Eigen::VectorXd& ds) {
    for (int l = m; l < n; ++l) {
      ds.segment(lay.eta(l), dim) = sys.psi[static_cast<std::size_t>(l - m)].value(t, dim);
    }
    for (int i = 0; i < m; ++i) {
      const auto fi = static_cast<std::size_t>(i);
      const Vec eps = epsilon(i, s);
      const int order = lay.order[fi];
      const Vec delta = order > 0 ? Vec(s.segment(lay.zeta(i, 0), dim)) : eps;
      ds.segment(lay.eta(i), dim) =
          -sys.k_eta[fi] * (s.segment(lay.eta(i), dim) - delta) + sys.phi1[fi].value(t, dim);
      const Vec phi2 = sys.phi2[fi].value(t, dim);
      for (int l = 0; l < order; ++l) {
        const double hl = sys.h[fi][static_cast<std::size_t>(l)];
        const Vec next = l + 1 < order ? Vec(s.segment(lay.zeta(i, l + 1), dim)) : eps;
        ds.segment(lay.zeta(i, l), dim) = -hl * (s.segment(lay.zeta(i, l), dim) - next) + phi2;
      }
    }
  };

  CascadeTrace trace;
  trace.k_eta = sys.k_eta;
  trace.h = sys.h;
  trace.alpha = sys.alpha;
  trace.dt = sys.dt;

  const double dt = sys.dt;
  const auto total = static_cast<std::int64_t>(std::llround(sys.t_end / dt));
  const auto per_sample = static_cast<std::int64_t>(std::llround(comm.sampling_period / dt));
  const auto per_record = static_cast<std::int64_t>(std::llround(sys.record_interval / dt));
  const auto last_seq =
      static_cast<std::int64_t>(std::floor(sys.t_end / comm.sampling_period + 1e-9));
  PayloadHistory history(n);
  const PayloadSource source = history.source();

  // Sup-over-step input norms accumulated since the last record.
  std::vector<double> u_acc(static_cast<std::size_t>(m), 0.0);
  std::vector<double> y_acc(static_cast<std::size_t>(m), 0.0);
  std::vector<std::vector<double>> ups_acc(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) ups_acc[static_cast<std::size_t>(i)].assign(lay.order[static_cast<std::size_t>(i)], 0.0);

  auto accumulate_inputs = [&](double t, const Eigen::VectorXd& s, const std::vector<Vec>& eps) {
    for (int i = 0; i < m; ++i) {
      const auto fi = static_cast<std::size_t>(i);
      const Vec cdot = eta_c_dot(i, t);
      u_acc[fi] = std::max(u_acc[fi], (eps[fi] - eta_c(i, s)).norm());
      y_acc[fi] = std::max(y_acc[fi], (sys.phi1[fi].value(t, dim) - cdot).norm());
      const double ups = (sys.phi2[fi].value(t, dim) - cdot).norm();
      for (auto& v : ups_acc[fi]) v = std::max(v, ups);
    }
  };

  Eigen::VectorXd k1(lay.size), k2(lay.size), k3(lay.size), k4(lay.size), tmp(lay.size);
  std::vector<Vec> eps(static_cast<std::size_t>(m));

  auto record = [&](double t) {
    CascadeSample smp;
    smp.t = t;
    Eigen::VectorXd stacked(static_cast<Eigen::Index>(m) * dim);
    for (int i = 0; i < m; ++i) {
      const auto fi = static_cast<std::size_t>(i);
      const Vec c = eta_c(i, x);
      const Vec et = x.segment(lay.eta(i), dim) - c;
      stacked.segment(static_cast<Eigen::Index>(i) * dim, dim) = et;
      smp.eta_tilde.push_back(et.norm());
      std::vector<double> zt;
      for (int l = 0; l < lay.order[fi]; ++l) zt.push_back((x.segment(lay.zeta(i, l), dim) - c).norm());
      smp.zeta_tilde.push_back(std::move(zt));
      smp.u.push_back(u_acc[fi]);
      smp.y.push_back(y_acc[fi]);
      smp.upsilon.push_back(ups_acc[fi]);
      smp.eta_dot.push_back(k1.segment(lay.eta(i), dim).norm());
      u_acc[fi] = 0.0;
      y_acc[fi] = 0.0;
      std::fill(ups_acc[fi].begin(), ups_acc[fi].end(), 0.0);
    }
    smp.error = stacked.norm();
    trace.samples.push_back(std::move(smp));
  };

  for (std::int64_t step = 0;; ++step) {
    const double t = static_cast<double>(step) * dt;
    if (step % per_sample == 0 && step / per_sample <= last_seq) {
      for (int i = 0; i < n; ++i) {
        history.record(i, step / per_sample, Vec(x.segment(lay.eta(i), dim)));
      }
    }
    network.advance_to_step(step, source, nullptr);
    for (int i = 0; i < m; ++i) eps[static_cast<std::size_t>(i)] = epsilon(i, x);
    accumulate_inputs(t, x, eps);
    rhs(t, x, k1);
    if (step % per_record == 0 || step == total) record(t);
    if (step == total) break;

    tmp = x + 0.5 * dt * k1;
    rhs(t + 0.5 * dt, tmp, k2);
    accumulate_inputs(t + 0.5 * dt, tmp, eps);
    tmp = x + 0.5 * dt * k2;
    rhs(t + 0.5 * dt, tmp, k3);
    tmp = x + dt * k3;
    rhs(t + dt, tmp, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    // The held inputs also act at the end of the step, before new arrivals.
    accumulate_inputs(t + dt, x, eps);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (!std::isfinite(x[k]) || std::abs(x[k]) > 1e9) {
        throw DivergenceError("cascade diverged at t = " + std::to_string(t + dt), t + dt, -1);
      }
    }
  }
  return trace;
}

double steady_state_bound(const CascadeTrace& trace) {
  if (trace.samples.empty()) return 0.0;
  const double t_end = trace.samples.back().t;
  double bound = 0.0;
  for (const auto& s : trace.samples) {
    if (s.t >= 0.8 * t_end - 1e-12) bound = std::max(bound, s.error);
  }
  return bound;
}

std::vector<double> gain_sweep_attenuation(const CascadeSystem& sys,
                                           const std::vector<double>& multipliers,
                                           std::uint64_t seed) {
  std::vector<double> out;
  for (double k : multipliers) {
    out.push_back(steady_state_bound(simulate_cascade(sys.with_gain_multiplier(k), seed)));
  }
  return out;
}

std::vector<double> blackout_sweep(const CascadeSystem& sys, const std::vector<double>& bounds,
                                   std::uint64_t seed) {
  std::vector<double> out;
  for (double b : bounds) {
    CascadeSystem s = sys;
    s.comm.blackout_bound = b;
    out.push_back(steady_state_bound(simulate_cascade(s, seed)));
  }
  return out;
}

namespace {

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  const double ratio = hi / lo;
  for (int k = 0; k < count; ++k) {
    out.push_back(lo * std::pow(ratio, static_cast<double>(k) / (count - 1)));
  }
  return out;
}

}  // namespace

EstimateReport iss_estimate_check(const CascadeTrace& trace) {
  EstimateReport report;
  const auto& s = trace.samples;
  if (s.size() < 3) return report;
  const double t_end = s.back().t;
  const double dt_rec = s[1].t - s[0].t;
  const double lo = dt_rec;
  const double hi = 0.5 * t_end;
  const auto t0s = log_grid(lo, hi, kEstimateGrid);
  const auto spans = log_grid(lo, hi, kEstimateGrid);
  const auto last = static_cast<std::ptrdiff_t>(s.size()) - 1;
  auto index_of = [&](double t) {
    return std::clamp<std::ptrdiff_t>(std::llround(t / dt_rec), 0, last);
  };
  const std::size_t m = s.front().eta_tilde.size();

  auto check = [&](int follower, const std::string& name, double t0, double t, double lhs,
                   double rhs) {
    if (lhs > rhs + kEstimateTolerance * (1.0 + rhs)) {
      report.violations.push_back({follower, name, t0, t, lhs, rhs});
    }
  };

  for (double t0v : t0s) {
    for (double span : spans) {
      const auto i0 = index_of(t0v);
      const auto i1 = index_of(t0v + span);
      if (i1 <= i0) continue;
      ++report.pairs_checked;
      const double t0 = s[static_cast<std::size_t>(i0)].t;
      const double t1 = s[static_cast<std::size_t>(i1)].t;
      const double elapsed = t1 - t0;
      for (std::size_t i = 0; i < m; ++i) {
        const int order = static_cast<int>(s.front().zeta_tilde[i].size());
        // Sups over [t0, t]: input norms are stored as sup over the step
        // ending at each sample, states as point values.
        double u_sup = 0.0;
        double y_sup = 0.0;
        std::vector<double> ups_sup(static_cast<std::size_t>(order), 0.0);
        std::vector<double> zeta_sup(static_cast<std::size_t>(order), 0.0);
        for (auto k = i0; k <= i1; ++k) {
          const auto& smp = s[static_cast<std::size_t>(k)];
          for (int l = 0; l < order; ++l) {
            zeta_sup[static_cast<std::size_t>(l)] =
                std::max(zeta_sup[static_cast<std::size_t>(l)], smp.zeta_tilde[i][static_cast<std::size_t>(l)]);
          }
          if (k == i0) continue;
          u_sup = std::max(u_sup, smp.u[i]);
          y_sup = std::max(y_sup, smp.y[i]);
          for (int l = 0; l < order; ++l) {
            ups_sup[static_cast<std::size_t>(l)] =
                std::max(ups_sup[static_cast<std::size_t>(l)], smp.upsilon[i][static_cast<std::size_t>(l)]);
          }
        }
        const auto& a = s[static_cast<std::size_t>(i0)];
        const auto& b = s[static_cast<std::size_t>(i1)];
        const int fid = static_cast<int>(i);
        const double k_eta = trace.k_eta[i];
        const double through = trace.alpha == 1 ? zeta_sup[0] : u_sup;
        check(fid, "eta", t0, t1, b.eta_tilde[i],
              std::exp(-k_eta * elapsed) * a.eta_tilde[i] + through + y_sup / k_eta);
        for (int l = 0; l < order; ++l) {
          const auto fl = static_cast<std::size_t>(l);
          const double hl = trace.h[i][fl];
          const double driver = l + 1 < order ? zeta_sup[fl + 1] : u_sup;
          check(fid, "zeta_" + std::to_string(l + 1), t0, t1, b.zeta_tilde[i][fl],
                std::exp(-hl * elapsed) * a.zeta_tilde[i][fl] + driver + ups_sup[fl] / hl);
        }
      }
    }
  }
  return report;
}

TopologyCertificate certify(const DirectedTopology& topo) {
  TopologyCertificate cert;
  cert.reachability = validate_reachability(topo);
  if (!cert.reachability.satisfied) return cert;
  const auto part = partition(topo);
  cert.containment_weights = containment_weights(part).w;
  const auto& w = cert.containment_weights;
  cert.weights_nonnegative = w.minCoeff() >= -kWeightNonnegativityTol;
  cert.rows_stochastic =
      ((w.rowwise().sum().array() - 1.0).abs() <= kRowSumTol).all();
  cert.l1_m_matrix = is_nonsingular_m_matrix(part.l1);
  cert.small_gain = small_gain_certificate(part);
  const auto m = part.l1.rows();
  cert.i_minus_gain_m_matrix =
      is_nonsingular_m_matrix(Eigen::MatrixXd::Identity(m, m) - cert.small_gain.gain_matrix);
  return cert;
}

}  // namespace containment
