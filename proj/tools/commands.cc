#include "commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "svg.h"

namespace containment::cli {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ordered_json matrix_json(const Eigen::MatrixXd& a) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

ordered_json vec_json(const Vec& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

void add(ValidationReport& r, std::string name, bool pass, std::string detail = {}) {
  r.checks.push_back({std::move(name), pass, std::move(detail)});
}

// Graph checks shared by scenario and cascade configs. Returns false when
// the topology is unusable for further checks.
bool check_topology(const DirectedTopology& topo, ValidationReport& r) {
  const auto cert = certify(topo);
  if (!cert.reachability.satisfied) {
    std::string ids;
    for (int i : cert.reachability.unreachable) ids += " " + std::to_string(i + 1);
    add(r, "reachability", false, "followers not reachable from any leader:" + ids);
    return false;
  }
  add(r, "reachability", true);
  add(r, "containment_weights", cert.weights_nonnegative && cert.rows_stochastic,
      std::string(cert.weights_nonnegative ? "" : "negative entry; ") +
          (cert.rows_stochastic ? "" : "row sums differ from 1"));
  add(r, "l1_m_matrix", cert.l1_m_matrix);
  add(r, "i_minus_gain_m_matrix", cert.i_minus_gain_m_matrix);
  add(r, "small_gain", cert.small_gain.pass,
      "spectral radius " + num(cert.small_gain.spectral_radius));
  r.certificate = {{"spectral_radius", cert.small_gain.spectral_radius},
                   {"small_gain", cert.small_gain.pass},
                   {"l1_m_matrix", cert.l1_m_matrix},
                   {"i_minus_gain_m_matrix", cert.i_minus_gain_m_matrix},
                   {"weights_nonnegative", cert.weights_nonnegative},
                   {"rows_stochastic", cert.rows_stochastic},
                   {"containment_weights", matrix_json(cert.containment_weights)}};
  return true;
}

fs::path resolve(const fs::path& out_dir, const std::string& p) { return out_dir / p; }

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_filename(p.stem().string() + suffix);
  return out;
}

Config load_with_seed(const CommandOptions& opts) {
  Config cfg = load_config(opts.config_path);
  if (opts.seed) cfg.sim.seed = *opts.seed;
  return cfg;
}

std::vector<double> snapshot_times(const Config& cfg) {
  if (!cfg.outputs.snapshot_times_seconds.empty()) return cfg.outputs.snapshot_times_seconds;
  const double t = cfg.sim.t_end_seconds;
  return {0.0, t / 4.0, t / 2.0, t};
}

// Runs `body`, mapping exceptions to exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const SchedulerError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const SingularMatrixError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

double max_hull(const TraceSample& s) {
  double out = 0.0;
  for (double h : s.hull) out = std::max(out, h);
  return out;
}

nlohmann::ordered_json estimate_summary(const EstimateReport& rep) {
  ordered_json out;
  out["pairs_checked"] = rep.pairs_checked;
  out["violations"] = rep.violations.size();
  ordered_json first = ordered_json::array();
  for (std::size_t k = 0; k < std::min<std::size_t>(rep.violations.size(), 10); ++k) {
    const auto& v = rep.violations[k];
    first.push_back({{"follower", v.follower + 1},
                     {"estimate", v.estimate},
                     {"t0", v.t0},
                     {"t", v.t},
                     {"lhs", v.lhs},
                     {"rhs", v.rhs}});
  }
  out["first_violations"] = first;
  return out;
}

}  // namespace

bool ValidationReport::pass() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string ValidationReport::text() const {
  std::string out;
  for (const auto& c : checks) {
    out += std::string(c.pass ? "ok   " : "FAIL ") + c.name;
    if (!c.detail.empty()) out += ": " + c.detail;
    out += "\n";
  }
  out += pass() ? "config valid\n" : "config invalid\n";
  return out;
}

nlohmann::ordered_json ValidationReport::json() const {
  ordered_json out;
  out["pass"] = pass();
  ordered_json list = ordered_json::array();
  for (const auto& c : checks) list.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  out["checks"] = list;
  if (!certificate.is_null()) out["certificate"] = certificate;
  return out;
}

ValidationReport validate_config(const Config& cfg) {
  ValidationReport r;
  if (cfg.is_cascade()) {
    CascadeSystem sys;
    try {
      sys = to_cascade(cfg);
    } catch (const ConfigError& e) {
      add(r, "config", false, e.what());
      return r;
    }
    add(r, "config", true);
    try {
      if (!check_topology(sys.topology(), r)) return r;
    } catch (const std::exception& e) {
      add(r, "topology", false, e.what());
      return r;
    }
    try {
      sys.validate();
      add(r, "cascade", true);
    } catch (const ConfigError& e) {
      add(r, "cascade", false, e.what());
    }
    return r;
  }

  Scenario sc;
  try {
    sc = to_scenario(cfg);
  } catch (const ConfigError& e) {
    add(r, "config", false, e.what());
    return r;
  }
  add(r, "config", true);
  try {
    if (!check_topology(sc.topology(), r)) return r;
  } catch (const std::exception& e) {
    add(r, "topology", false, e.what());
    return r;
  }

  try {
    sc.comm.validate();
    add(r, "comm", true);
  } catch (const ConfigError& e) {
    add(r, "comm", false, e.what());
  }

  for (int i = 0; i < static_cast<int>(sc.agents.size()); ++i) {
    const auto& a = sc.agents[static_cast<std::size_t>(i)];
    if (a.model.kind != ModelKind::Oscillator) continue;
    const auto spec = check_oscillator_spectrum(a.model.s1, a.model.s2);
    add(r, "oscillator_spectrum agent " + std::to_string(i + 1), spec.pass, spec.diagnostic);
  }

  for (int i = 0; i < sc.followers; ++i) {
    const auto& c = sc.controllers[static_cast<std::size_t>(i)];
    const auto& model = sc.agents[static_cast<std::size_t>(i)].model;
    const Eigen::MatrixXd* s2 = model.kind == ModelKind::Oscillator ? &model.s2 : nullptr;
    const auto g = check_gains(c.variant, c.psi_mode, c.gains, s2);
    std::string detail;
    for (const auto& d : g.diagnostics) detail += (detail.empty() ? "" : "; ") + d;
    add(r, "gains follower " + std::to_string(i + 1), g.pass, detail);
  }

  try {
    sc.validate();
    add(r, "scenario", true);
  } catch (const ConfigError& e) {
    add(r, "scenario", false, e.what());
  }
  return r;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path.string() + "'");
  }
}

std::string trace_csv(const Trace& trace) {
  const int dim = trace.dim;
  std::string out = "t,agent_id,role";
  for (int k = 1; k <= dim; ++k) out += ",p_" + std::to_string(k);
  for (int k = 1; k <= dim; ++k) out += ",v_" + std::to_string(k);
  out += ",err_norm,hull_dist\n";
  for (const auto& s : trace.samples) {
    const std::string t = num(s.t);
    for (int i = 0; i < trace.agents; ++i) {
      const bool follower = i < trace.followers;
      out += t + "," + std::to_string(i + 1) + (follower ? ",follower" : ",leader");
      for (int k = 0; k < dim; ++k) out += "," + num(s.p[static_cast<std::size_t>(i)][k]);
      for (int k = 0; k < dim; ++k) out += "," + num(s.v[static_cast<std::size_t>(i)][k]);
      if (follower) {
        out += "," + num(s.pos_error.segment(i * dim, dim).norm()) + "," +
               num(s.hull[static_cast<std::size_t>(i)]);
      } else {
        out += ",0,0";
      }
      out += "\n";
    }
  }
  return out;
}

std::string cascade_csv(const CascadeTrace& trace) {
  const std::size_t m = trace.k_eta.size();
  std::string out = "t,error";
  for (std::size_t i = 1; i <= m; ++i) out += ",eta_tilde_" + std::to_string(i);
  out += "\n";
  for (const auto& s : trace.samples) {
    out += num(s.t) + "," + num(s.error);
    for (double e : s.eta_tilde) out += "," + num(e);
    out += "\n";
  }
  return out;
}

std::string delivery_csv(const Trace& trace) {
  std::string out = "edge,seq,send_time,arrival_time,applied_time,accepted\n";
  for (const auto& d : trace.audit) {
    out += std::to_string(d.edge.from + 1) + "->" + std::to_string(d.edge.to + 1) + "," +
           std::to_string(d.seq) + "," + num(d.send_time) + "," + num(d.arrival_time) + "," +
           num(d.applied_time) + "," + (d.accepted ? "1" : "0") + "\n";
  }
  return out;
}

std::string schedule_csv(const std::vector<LinkSchedule>& schedules) {
  std::ostringstream os;
  write_schedule_csv(os, schedules);
  return os.str();
}

nlohmann::ordered_json trace_sidecar(const Config& cfg, const Trace& trace) {
  ordered_json out;
  out["scenario"] = to_json(cfg);
  out["seed"] = trace.seed;
  out["dt_seconds"] = trace.dt;
  out["samples"] = trace.samples.size();
  out["containment_weights"] = matrix_json(trace.containment_weights);
  ordered_json labels = ordered_json::array();
  for (const auto& l : trace.internal_labels) labels.push_back(l);
  out["internal_labels"] = labels;
  if (!trace.samples.empty()) {
    const auto& last = trace.samples.back();
    out["final"] = {{"t", last.t},
                    {"position_error_norm", last.pos_error.norm()},
                    {"velocity_error_norm", last.vel_error.norm()},
                    {"vhat_error_norm", last.vhat_error.norm()},
                    {"max_hull_distance", max_hull(last)}};
  }
  return out;
}

double trace_steady_state_bound(const Trace& trace) {
  if (trace.samples.empty()) return 0.0;
  const double t_end = trace.samples.back().t;
  double out = 0.0;
  for (const auto& s : trace.samples) {
    if (s.t >= 0.8 * t_end - 1e-12) out = std::max(out, s.pos_error.norm());
  }
  return out;
}

Config apply_axis(const Config& cfg, const std::string& axis, double value) {
  std::vector<std::string> parts;
  {
    std::stringstream ss(axis);
    std::string part;
    while (std::getline(ss, part, '.')) parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty sweep axis");
  ordered_json doc = to_json(cfg);

  if (parts.size() == 2 && parts[0] == "gains") {
    if (cfg.is_cascade()) throw ConfigError("sweep axis '" + axis + "' needs controllers");
    const GainSet d;
    const std::map<std::string, double> defaults = {
        {"k_p", d.k_p},     {"k_d", d.k_d},     {"L_p", d.L_p},     {"L_d", d.L_d},
        {"k_psi", d.k_psi}, {"k_phi", d.k_phi}, {"k_r", d.k_r},     {"k_eta", d.k_eta},
        {"lambda", d.lambda}, {"boundary_layer_eps", d.boundary_layer_eps}};
    std::map<std::string, double> powers;
    if (parts[1] == "bandwidth") {
      powers = {{"k_p", 2.0}, {"k_d", 1.0}, {"L_p", 1.0}, {"L_d", 1.0}, {"k_psi", 1.0}};
    } else if (defaults.count(parts[1])) {
      powers = {{parts[1], 1.0}};
    } else {
      throw ConfigError("unknown gain '" + parts[1] + "' in sweep axis");
    }
    for (auto& c : doc["controllers"]) {
      for (const auto& [name, power] : powers) {
        const double base = c["gains"].contains(name) ? c["gains"][name].get<double>() : defaults.at(name);
        c["gains"][name] = base * std::pow(value, power);
      }
    }
    return from_json(nlohmann::json::parse(doc.dump()));
  }

  if (parts.size() == 2 && parts[0] == "cascade" && parts[1] == "gain_multiplier") {
    if (!cfg.is_cascade()) throw ConfigError("sweep axis '" + axis + "' needs a cascade section");
    for (auto& k : doc["cascade"]["k_eta"]) k = k.get<double>() * value;
    for (auto& row : doc["cascade"]["h"]) {
      for (auto& h : row) h = h.get<double>() * value;
    }
    return from_json(nlohmann::json::parse(doc.dump()));
  }

  ordered_json* node = &doc;
  for (const auto& part : parts) {
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError("sweep axis '" + axis + "': '" + part + "' is not an index");
      }
      if (idx >= node->size()) throw ConfigError("sweep axis '" + axis + "': index out of range");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (node->contains(part)) {
        node = &(*node)[part];
      } else if (node->contains(part + "_seconds")) {
        node = &(*node)[part + "_seconds"];
      } else {
        throw ConfigError("sweep axis '" + axis + "' does not name a config entry");
      }
    } else {
      throw ConfigError("sweep axis '" + axis + "' does not name a config entry");
    }
  }
  if (!node->is_number()) throw ConfigError("sweep axis '" + axis + "' is not numeric");
  if (node->is_number_integer()) {
    if (value != std::floor(value)) throw ConfigError("sweep axis '" + axis + "' takes integers");
    if (node->is_number_unsigned()) {
      if (value < 0) throw ConfigError("sweep axis '" + axis + "' takes nonnegative integers");
      *node = static_cast<std::uint64_t>(value);
    } else {
      *node = static_cast<std::int64_t>(value);
    }
  } else {
    *node = value;
  }
  return from_json(nlohmann::json::parse(doc.dump()));
}

std::vector<SweepRow> run_sweep(const Config& cfg, const std::string& axis,
                                const std::vector<double>& values, std::uint64_t seed) {
  std::vector<Config> configs;
  for (double v : values) configs.push_back(apply_axis(cfg, axis, v));
  std::vector<std::future<SweepRow>> jobs;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    jobs.push_back(std::async(std::launch::async, [&, k] {
      SweepRow row;
      row.value = values[k];
      const Config& c = configs[k];
      if (c.is_cascade()) {
        const auto trace = simulate_cascade(to_cascade(c), seed);
        row.final_error = trace.samples.back().error;
        row.steady_state_bound = steady_state_bound(trace);
      } else {
        const auto trace = run(to_scenario(c), seed);
        row.final_error = trace.samples.back().pos_error.norm();
        row.steady_state_bound = trace_steady_state_bound(trace);
        row.max_hull_distance = max_hull(trace.samples.back());
      }
      return row;
    }));
  }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows) {
  std::string out = axis + ",final_error,steady_state_bound,max_hull_dist\n";
  for (const auto& r : rows) {
    out += num(r.value) + "," + num(r.final_error) + "," + num(r.steady_state_bound) + "," +
           num(r.max_hull_distance) + "\n";
  }
  return out;
}

int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = load_with_seed(opts);
    const auto report = validate_config(cfg);
    if (opts.json) {
      out << report.json().dump(2) << "\n";
    } else {
      out << report.text();
    }
    return report.pass() ? kExitOk : kExitValidation;
  });
}

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = load_with_seed(opts);
    const auto report = validate_config(cfg);
    if (!report.pass()) {
      err << report.text();
      return kExitValidation;
    }
    const fs::path csv = resolve(opts.out_dir, cfg.outputs.csv_path);
    const std::uint64_t seed = cfg.sim.seed;

    if (cfg.is_cascade()) {
      const auto trace = simulate_cascade(to_cascade(cfg), seed);
      write_file_atomic(csv, cascade_csv(trace));
      if (cfg.outputs.svg_path) {
        std::vector<double> t, e;
        for (const auto& s : trace.samples) {
          t.push_back(s.t);
          e.push_back(s.error);
        }
        write_file_atomic(resolve(opts.out_dir, *cfg.outputs.svg_path), error_svg("cascade error", t, e));
      }
      if (cfg.outputs.report_path) {
        ordered_json rep = report.json();
        rep["estimates"] = estimate_summary(iss_estimate_check(trace));
        rep["steady_state_bound"] = steady_state_bound(trace);
        write_file_atomic(resolve(opts.out_dir, *cfg.outputs.report_path), rep.dump(2) + "\n");
      }
      out << "cascade run: " << trace.samples.size() << " samples, final error "
          << num(trace.samples.back().error) << "\n";
      return kExitOk;
    }

    const Trace trace = run(to_scenario(cfg), seed);
    write_file_atomic(csv, trace_csv(trace));
    write_file_atomic(with_suffix(csv, ".meta.json"), trace_sidecar(cfg, trace).dump(2) + "\n");
    const fs::path audit = cfg.outputs.audit_path ? resolve(opts.out_dir, *cfg.outputs.audit_path)
                                                  : with_suffix(csv, ".schedule.csv");
    write_file_atomic(audit, schedule_csv(trace.schedules));
    write_file_atomic(with_suffix(csv, ".deliveries.csv"), delivery_csv(trace));
    if (cfg.outputs.svg_path) {
      write_file_atomic(resolve(opts.out_dir, *cfg.outputs.svg_path),
                        trajectory_svg(trace, snapshot_times(cfg)));
    }
    const auto& last = trace.samples.back();
    if (cfg.outputs.report_path) {
      ordered_json rep = report.json();
      rep["final"] = trace_sidecar(cfg, trace)["final"];
      rep["wall_seconds"] = trace.wall_seconds;
      write_file_atomic(resolve(opts.out_dir, *cfg.outputs.report_path), rep.dump(2) + "\n");
    }
    out << "run '" << cfg.name << "': " << trace.samples.size() << " samples, t_end "
        << num(last.t) << " s, containment error " << num(last.pos_error.norm())
        << ", max hull distance " << num(max_hull(last)) << ", wall " << num(trace.wall_seconds)
        << " s\n";
    out << "wrote " << csv.string() << "\n";
    return kExitOk;
  });
}

int cmd_sweep(const CommandOptions& opts, const std::string& axis,
              const std::vector<double>& values, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = load_with_seed(opts);
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    for (double v : values) {
      const auto report = validate_config(apply_axis(cfg, axis, v));
      if (!report.pass()) {
        err << "value " << num(v) << ":\n" << report.text();
        return kExitValidation;
      }
    }
    const auto rows = run_sweep(cfg, axis, values, cfg.sim.seed);
    const std::string table = sweep_csv(axis, rows);
    out << table;
    fs::path path = resolve(opts.out_dir, cfg.outputs.csv_path);
    path = with_suffix(path, ".sweep.csv");
    write_file_atomic(path, table);
    return kExitOk;
  });
}

int cmd_report(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Config cfg = load_with_seed(opts);
    const auto report = validate_config(cfg);
    ordered_json rep = report.json();
    if (report.pass() && cfg.is_cascade()) {
      const auto trace = simulate_cascade(to_cascade(cfg), cfg.sim.seed);
      rep["estimates"] = estimate_summary(iss_estimate_check(trace));
      rep["steady_state_bound"] = steady_state_bound(trace);
    } else if (report.pass()) {
      const Scenario sc = to_scenario(cfg);
      ordered_json gains = ordered_json::array();
      for (int i = 0; i < sc.followers; ++i) {
        const auto& c = sc.controllers[static_cast<std::size_t>(i)];
        gains.push_back({{"follower", i + 1},
                         {"variant", to_string(c.variant)},
                         {"real_root_lambda", real_root_lambda(c.gains.k_p, c.gains.k_d).value_or(0.0)}});
      }
      rep["controllers"] = gains;
      ordered_json leaders = ordered_json::array();
      for (int i = sc.followers; i < static_cast<int>(sc.agents.size()); ++i) {
        const auto& tr = *sc.agents[static_cast<std::size_t>(i)].trajectory;
        leaders.push_back({{"agent", i + 1},
                           {"kind", to_string(tr.kind)},
                           {"initial_position", vec_json(tr.initial_position())}});
      }
      rep["leaders"] = leaders;
    }
    const std::string text = rep.dump(2) + "\n";
    if (cfg.outputs.report_path) {
      const fs::path path = resolve(opts.out_dir, *cfg.outputs.report_path);
      write_file_atomic(path, text);
      out << "wrote " << path.string() << "\n";
    } else {
      out << text;
    }
    return report.pass() ? kExitOk : kExitValidation;
  });
}

}  // namespace containment::cli
