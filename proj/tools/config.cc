#include "config.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace containment::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> vector_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(number(v[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Matrix matrix_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of rows");
  Matrix out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(vector_of(v[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return number(*it, where + "." + key);
}

std::optional<std::string> optional_text(const json& obj, const char* key,
                                         const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return text(*it, where + "." + key);
}

PerturbationConfig perturbation_of(const json& v, const std::string& where) {
  check_keys(v, {"kind", "amplitude", "omega", "phase", "rate"}, where);
  PerturbationConfig p;
  p.kind = text(require(v, "kind", where), where + ".kind");
  perturbation_kind_from_string(p.kind);
  if (v.contains("amplitude")) p.amplitude = vector_of(v["amplitude"], where + ".amplitude");
  if (auto x = optional_number(v, "omega", where)) p.omega = *x;
  if (auto x = optional_number(v, "phase", where)) p.phase = *x;
  if (auto x = optional_number(v, "rate", where)) p.rate = *x;
  return p;
}

std::vector<PerturbationConfig> perturbation_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of perturbations");
  std::vector<PerturbationConfig> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(perturbation_of(v[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

ordered_json perturbation_json(const PerturbationConfig& p) {
  ordered_json j;
  j["kind"] = p.kind;
  if (!p.amplitude.empty()) j["amplitude"] = p.amplitude;
  j["omega"] = p.omega;
  j["phase"] = p.phase;
  j["rate"] = p.rate;
  return j;
}

const std::set<std::string>& gain_names() {
  static const std::set<std::string> names = {"k_p",   "k_d", "L_p",  "L_d",    "k_psi",
                                              "k_phi", "k_r", "k_eta", "lambda",
                                              "boundary_layer_eps"};
  return names;
}

Eigen::MatrixXd to_eigen(const Matrix& rows, const std::string& where) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd out(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c) {
      throw ConfigError(where + ": ragged matrix");
    }
    for (Eigen::Index j = 0; j < c; ++j) out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

Vec to_vec(const std::vector<double>& v, int dim, const std::string& where) {
  if (static_cast<int>(v.size()) != dim) {
    throw ConfigError(where + ": expected " + std::to_string(dim) + " entries");
  }
  Vec out(dim);
  for (int k = 0; k < dim; ++k) out[k] = v[static_cast<std::size_t>(k)];
  return out;
}

std::string line_context(const std::string& src, std::size_t byte) {
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t k = 0; k < std::min(byte, src.size()); ++k) {
    if (src[k] == '\n') {
      ++line;
      line_start = k + 1;
    }
  }
  const std::size_t end = src.find('\n', line_start);
  const std::string content =
      src.substr(line_start, end == std::string::npos ? std::string::npos : end - line_start);
  const std::size_t column = byte >= line_start ? byte - line_start : 0;
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + content;
}

template <typename T>
T broadcast(const std::vector<T>& values, std::size_t index, const std::string& where) {
  if (values.size() == 1) return values.front();
  if (index >= values.size()) throw ConfigError(where + ": not enough entries");
  return values[index];
}

Perturbation to_perturbation(const PerturbationConfig& p, int dim, const std::string& where) {
  Perturbation out;
  out.kind = perturbation_kind_from_string(p.kind);
  if (out.kind != PerturbationKind::Zero) out.amplitude = to_vec(p.amplitude, dim, where + ".amplitude");
  out.omega = p.omega;
  out.phase = p.phase;
  out.rate = p.rate;
  return out;
}

}  // namespace

Config from_json(const json& doc) {
  const bool cascade = doc.is_object() && doc.contains("cascade");
  if (cascade) {
    check_keys(doc, {"name", "dimension", "topology", "comm", "sim", "outputs", "cascade"}, "config");
  } else {
    check_keys(doc, {"name", "dimension", "topology", "agents", "controllers", "comm", "sim",
                     "outputs"},
               "config");
  }
  Config cfg;
  if (auto name = optional_text(doc, "name", "config")) cfg.name = *name;
  if (doc.contains("dimension")) cfg.dimension = integer(doc["dimension"], "config.dimension");

  const json& topo = require(doc, "topology", "config");
  check_keys(topo, {"m", "weights"}, "topology");
  cfg.m = integer(require(topo, "m", "topology"), "topology.m");
  cfg.weights = matrix_of(require(topo, "weights", "topology"), "topology.weights");

  if (!cascade) {
    const json& agents = require(doc, "agents", "config");
    if (!agents.is_array()) throw ConfigError("agents: expected an array");
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const std::string where = "agents[" + std::to_string(k) + "]";
      const json& a = agents[k];
      check_keys(a, {"id", "model", "drift", "S1", "S2", "initial", "trajectory"}, where);
      AgentConfig ac;
      ac.id = integer(require(a, "id", where), where + ".id");
      if (a.contains("model")) ac.model = text(a["model"], where + ".model");
      ac.drift = optional_text(a, "drift", where);
      if (a.contains("S1")) ac.s1 = matrix_of(a["S1"], where + ".S1");
      if (a.contains("S2")) ac.s2 = matrix_of(a["S2"], where + ".S2");
      if (a.contains("initial")) {
        const json& init = a["initial"];
        check_keys(init, {"p", "v"}, where + ".initial");
        ac.p = vector_of(require(init, "p", where + ".initial"), where + ".initial.p");
        ac.v = vector_of(require(init, "v", where + ".initial"), where + ".initial.v");
      }
      if (a.contains("trajectory")) {
        const json& tr = a["trajectory"];
        const std::string tw = where + ".trajectory";
        check_keys(tr, {"kind", "p0", "v_d", "v0", "index"}, tw);
        TrajectoryConfig tc;
        tc.kind = text(require(tr, "kind", tw), tw + ".kind");
        leader_kind_from_string(tc.kind);
        tc.p0 = vector_of(require(tr, "p0", tw), tw + ".p0");
        if (tr.contains("v_d")) tc.v_d = vector_of(tr["v_d"], tw + ".v_d");
        if (tr.contains("v0")) tc.v0 = vector_of(tr["v0"], tw + ".v0");
        if (tr.contains("index")) tc.index = integer(tr["index"], tw + ".index");
        ac.trajectory = tc;
      }
      cfg.agents.push_back(std::move(ac));
    }

    const json& ctrls = require(doc, "controllers", "config");
    if (!ctrls.is_array()) throw ConfigError("controllers: expected an array");
    for (std::size_t k = 0; k < ctrls.size(); ++k) {
      const std::string where = "controllers[" + std::to_string(k) + "]";
      const json& c = ctrls[k];
      check_keys(c, {"agents", "variant", "psi_mode", "gains", "v_d", "initial"}, where);
      ControllerConfig cc;
      const json& ids = require(c, "agents", where);
      if (!ids.is_array()) throw ConfigError(where + ".agents: expected an array of ids");
      for (const auto& id : ids) cc.agents.push_back(integer(id, where + ".agents"));
      cc.variant = text(require(c, "variant", where), where + ".variant");
      control_variant_from_string(cc.variant);
      if (c.contains("psi_mode")) cc.psi_mode = text(c["psi_mode"], where + ".psi_mode");
      psi_mode_from_string(cc.psi_mode);
      if (c.contains("gains")) {
        const json& g = c["gains"];
        if (!g.is_object()) throw ConfigError(where + ".gains: expected an object");
        for (const auto& [key, value] : g.items()) {
          if (!gain_names().count(key)) throw ConfigError(where + ".gains: unknown key '" + key + "'");
          cc.gains[key] = number(value, where + ".gains." + key);
        }
      }
      if (c.contains("v_d")) cc.v_d = vector_of(c["v_d"], where + ".v_d");
      if (c.contains("initial")) {
        const json& init = c["initial"];
        if (!init.is_object()) throw ConfigError(where + ".initial: expected an object");
        for (const auto& [key, value] : init.items()) {
          cc.initial[key] = vector_of(value, where + ".initial." + key);
        }
      }
      cfg.controllers.push_back(std::move(cc));
    }
  }

  const json& comm = require(doc, "comm", "config");
  check_keys(comm, {"T_seconds", "T_star_seconds", "drop_prob", "delay_max_seconds",
                    "delay_quantum_seconds"},
             "comm");
  cfg.comm.T_seconds = number(require(comm, "T_seconds", "comm"), "comm.T_seconds");
  cfg.comm.T_star_seconds = number(require(comm, "T_star_seconds", "comm"), "comm.T_star_seconds");
  if (auto x = optional_number(comm, "drop_prob", "comm")) cfg.comm.drop_prob = *x;
  if (auto x = optional_number(comm, "delay_max_seconds", "comm")) cfg.comm.delay_max_seconds = *x;
  cfg.comm.delay_quantum_seconds = optional_number(comm, "delay_quantum_seconds", "comm");

  const json& sim = require(doc, "sim", "config");
  check_keys(sim, {"dt_seconds", "t_end_seconds", "seed", "record_interval_seconds"}, "sim");
  cfg.sim.dt_seconds = number(require(sim, "dt_seconds", "sim"), "sim.dt_seconds");
  cfg.sim.t_end_seconds = number(require(sim, "t_end_seconds", "sim"), "sim.t_end_seconds");
  if (sim.contains("seed")) {
    if (!sim["seed"].is_number_unsigned()) throw ConfigError("sim.seed: expected a nonnegative integer");
    cfg.sim.seed = sim["seed"].get<std::uint64_t>();
  }
  if (auto x = optional_number(sim, "record_interval_seconds", "sim")) {
    cfg.sim.record_interval_seconds = *x;
  }

  if (doc.contains("outputs")) {
    const json& out = doc["outputs"];
    check_keys(out, {"csv_path", "svg_path", "report_path", "audit_path", "snapshot_times_seconds"},
               "outputs");
    if (auto x = optional_text(out, "csv_path", "outputs")) cfg.outputs.csv_path = *x;
    cfg.outputs.svg_path = optional_text(out, "svg_path", "outputs");
    cfg.outputs.report_path = optional_text(out, "report_path", "outputs");
    cfg.outputs.audit_path = optional_text(out, "audit_path", "outputs");
    if (out.contains("snapshot_times_seconds")) {
      cfg.outputs.snapshot_times_seconds =
          vector_of(out["snapshot_times_seconds"], "outputs.snapshot_times_seconds");
    }
  }

  if (cascade) {
    const json& c = doc["cascade"];
    check_keys(c, {"alpha", "k_eta", "h", "phi1", "phi2", "psi", "eta0"}, "cascade");
    CascadeSection cs;
    if (c.contains("alpha")) cs.alpha = integer(c["alpha"], "cascade.alpha");
    cs.k_eta = vector_of(require(c, "k_eta", "cascade"), "cascade.k_eta");
    cs.h = matrix_of(require(c, "h", "cascade"), "cascade.h");
    if (c.contains("phi1")) cs.phi1 = perturbation_list(c["phi1"], "cascade.phi1");
    if (c.contains("phi2")) cs.phi2 = perturbation_list(c["phi2"], "cascade.phi2");
    if (c.contains("psi")) cs.psi = perturbation_list(c["psi"], "cascade.psi");
    cs.eta0 = matrix_of(require(c, "eta0", "cascade"), "cascade.eta0");
    cfg.cascade = std::move(cs);
  }
  return cfg;
}

Config parse_config(const std::string& src) {
  json doc;
  try {
    doc = json::parse(src);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + line_context(src, e.byte == 0 ? 0 : e.byte - 1) +
                      " (" + e.what() + ")");
  }
  return from_json(doc);
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ordered_json to_json(const Config& cfg) {
  ordered_json doc;
  doc["name"] = cfg.name;
  doc["dimension"] = cfg.dimension;
  doc["topology"] = {{"m", cfg.m}, {"weights", cfg.weights}};
  if (!cfg.is_cascade()) {
    ordered_json agents = ordered_json::array();
    for (const auto& a : cfg.agents) {
      ordered_json j;
      j["id"] = a.id;
      j["model"] = a.model;
      if (a.drift) j["drift"] = *a.drift;
      if (a.s1) j["S1"] = *a.s1;
      if (a.s2) j["S2"] = *a.s2;
      if (!a.p.empty() || !a.v.empty()) j["initial"] = {{"p", a.p}, {"v", a.v}};
      if (a.trajectory) {
        ordered_json tr;
        tr["kind"] = a.trajectory->kind;
        tr["p0"] = a.trajectory->p0;
        if (!a.trajectory->v_d.empty()) tr["v_d"] = a.trajectory->v_d;
        if (!a.trajectory->v0.empty()) tr["v0"] = a.trajectory->v0;
        if (a.trajectory->index) tr["index"] = *a.trajectory->index;
        j["trajectory"] = tr;
      }
      agents.push_back(j);
    }
    doc["agents"] = agents;
    ordered_json ctrls = ordered_json::array();
    for (const auto& c : cfg.controllers) {
      ordered_json j;
      j["agents"] = c.agents;
      j["variant"] = c.variant;
      j["psi_mode"] = c.psi_mode;
      j["gains"] = ordered_json::object();
      for (const auto& [k, v] : c.gains) j["gains"][k] = v;
      if (!c.v_d.empty()) j["v_d"] = c.v_d;
      if (!c.initial.empty()) {
        j["initial"] = ordered_json::object();
        for (const auto& [k, v] : c.initial) j["initial"][k] = v;
      }
      ctrls.push_back(j);
    }
    doc["controllers"] = ctrls;
  }
  ordered_json comm;
  comm["T_seconds"] = cfg.comm.T_seconds;
  comm["T_star_seconds"] = cfg.comm.T_star_seconds;
  comm["drop_prob"] = cfg.comm.drop_prob;
  comm["delay_max_seconds"] = cfg.comm.delay_max_seconds;
  if (cfg.comm.delay_quantum_seconds) comm["delay_quantum_seconds"] = *cfg.comm.delay_quantum_seconds;
  doc["comm"] = comm;
  doc["sim"] = {{"dt_seconds", cfg.sim.dt_seconds},
                {"t_end_seconds", cfg.sim.t_end_seconds},
                {"seed", cfg.sim.seed},
                {"record_interval_seconds", cfg.sim.record_interval_seconds}};
  ordered_json out;
  out["csv_path"] = cfg.outputs.csv_path;
  if (cfg.outputs.svg_path) out["svg_path"] = *cfg.outputs.svg_path;
  if (cfg.outputs.report_path) out["report_path"] = *cfg.outputs.report_path;
  if (cfg.outputs.audit_path) out["audit_path"] = *cfg.outputs.audit_path;
  if (!cfg.outputs.snapshot_times_seconds.empty()) {
    out["snapshot_times_seconds"] = cfg.outputs.snapshot_times_seconds;
  }
  doc["outputs"] = out;
  if (cfg.cascade) {
    const auto& cs = *cfg.cascade;
    ordered_json c;
    c["alpha"] = cs.alpha;
    c["k_eta"] = cs.k_eta;
    c["h"] = cs.h;
    auto list = [](const std::vector<PerturbationConfig>& ps) {
      ordered_json arr = ordered_json::array();
      for (const auto& p : ps) arr.push_back(perturbation_json(p));
      return arr;
    };
    c["phi1"] = list(cs.phi1);
    c["phi2"] = list(cs.phi2);
    c["psi"] = list(cs.psi);
    c["eta0"] = cs.eta0;
    doc["cascade"] = c;
  }
  return doc;
}

CommConfig to_comm(const Config& cfg) {
  CommConfig comm;
  comm.sampling_period = cfg.comm.T_seconds;
  comm.blackout_bound = cfg.comm.T_star_seconds;
  comm.drop_probability = cfg.comm.drop_prob;
  comm.max_delay = cfg.comm.delay_max_seconds;
  comm.delay_quantum = cfg.comm.delay_quantum_seconds.value_or(cfg.comm.T_seconds / 10.0);
  comm.seed = cfg.sim.seed;
  return comm;
}

Scenario to_scenario(const Config& cfg) {
  if (cfg.is_cascade()) throw ConfigError("config describes a cascade system, not a scenario");
  Scenario sc;
  sc.name = cfg.name;
  sc.dim = cfg.dimension;
  sc.weights = to_eigen(cfg.weights, "topology.weights");
  sc.followers = cfg.m;
  const int n = static_cast<int>(sc.weights.rows());
  const int dim = cfg.dimension;

  std::vector<const AgentConfig*> by_id(static_cast<std::size_t>(n), nullptr);
  for (const auto& a : cfg.agents) {
    if (a.id < 1 || a.id > n) throw ConfigError("agent id " + std::to_string(a.id) + " out of range");
    if (by_id[static_cast<std::size_t>(a.id - 1)]) {
      throw ConfigError("agent id " + std::to_string(a.id) + " listed twice");
    }
    by_id[static_cast<std::size_t>(a.id - 1)] = &a;
  }
  for (int i = 0; i < n; ++i) {
    const AgentConfig* a = by_id[static_cast<std::size_t>(i)];
    const std::string where = "agent " + std::to_string(i + 1);
    if (!a) throw ConfigError(where + " missing");
    AgentSpec spec;
    const ModelKind kind = model_kind_from_string(a->model);
    switch (kind) {
      case ModelKind::DoubleIntegrator:
        spec.model = AgentModel::double_integrator(dim);
        break;
      case ModelKind::NonlinearFollower:
        if (!a->drift) throw ConfigError(where + ": nonlinear model needs a drift");
        spec.model = AgentModel::nonlinear(dim, *a->drift);
        break;
      case ModelKind::Oscillator:
        if (!a->s1 || !a->s2) throw ConfigError(where + ": oscillator model needs S1 and S2");
        spec.model = AgentModel::oscillator(to_eigen(*a->s1, where + ".S1"),
                                            to_eigen(*a->s2, where + ".S2"));
        break;
    }
    const bool leader = i >= cfg.m;
    if (leader) {
      if (!a->trajectory) throw ConfigError(where + ": leaders need a trajectory");
      const auto& tc = *a->trajectory;
      LeaderTrajectory tr;
      tr.kind = leader_kind_from_string(tc.kind);
      tr.p0 = to_vec(tc.p0, dim, where + ".trajectory.p0");
      if (!tc.v_d.empty()) tr.v_d = to_vec(tc.v_d, dim, where + ".trajectory.v_d");
      if (!tc.v0.empty()) tr.v0 = to_vec(tc.v0, dim, where + ".trajectory.v0");
      tr.index = tc.index.value_or(i + 1);
      if (tr.kind == LeaderKind::OscillatorFree) {
        if (kind != ModelKind::Oscillator) {
          throw ConfigError(where + ": oscillator_free trajectory needs an oscillator model");
        }
        tr.s1 = spec.model.s1;
        tr.s2 = spec.model.s2;
      }
      spec.trajectory = tr;
    } else {
      if (a->trajectory) throw ConfigError(where + ": followers take initial, not trajectory");
      spec.p0 = to_vec(a->p, dim, where + ".initial.p");
      spec.v0 = to_vec(a->v, dim, where + ".initial.v");
    }
    sc.agents.push_back(std::move(spec));
  }

  sc.controllers.resize(static_cast<std::size_t>(std::max(cfg.m, 0)));
  std::vector<bool> assigned(static_cast<std::size_t>(std::max(cfg.m, 0)), false);
  for (const auto& c : cfg.controllers) {
    ControllerSpec spec;
    spec.variant = control_variant_from_string(c.variant);
    spec.psi_mode = psi_mode_from_string(c.psi_mode);
    GainSet& g = spec.gains;
    std::map<std::string, double*> slots = {
        {"k_p", &g.k_p},     {"k_d", &g.k_d},     {"L_p", &g.L_p},
        {"L_d", &g.L_d},     {"k_psi", &g.k_psi}, {"k_phi", &g.k_phi},
        {"k_r", &g.k_r},     {"k_eta", &g.k_eta}, {"lambda", &g.lambda},
        {"boundary_layer_eps", &g.boundary_layer_eps}};
    for (const auto& [k, v] : c.gains) *slots.at(k) = v;
    if (!c.v_d.empty()) spec.v_d = to_vec(c.v_d, dim, "controller v_d");
    for (const auto& [k, v] : c.initial) spec.initial[k] = to_vec(v, dim, "controller initial." + k);
    for (int id : c.agents) {
      if (id < 1 || id > cfg.m) {
        throw ConfigError("controller assigned to agent " + std::to_string(id) + ", not a follower");
      }
      if (assigned[static_cast<std::size_t>(id - 1)]) {
        throw ConfigError("follower " + std::to_string(id) + " has two controllers");
      }
      assigned[static_cast<std::size_t>(id - 1)] = true;
      sc.controllers[static_cast<std::size_t>(id - 1)] = spec;
    }
  }
  for (int i = 0; i < cfg.m; ++i) {
    if (!assigned[static_cast<std::size_t>(i)]) {
      throw ConfigError("follower " + std::to_string(i + 1) + " has no controller");
    }
  }
  sc.comm = to_comm(cfg);
  sc.dt = cfg.sim.dt_seconds;
  sc.t_end = cfg.sim.t_end_seconds;
  sc.record_interval = cfg.sim.record_interval_seconds;
  return sc;
}

CascadeSystem to_cascade(const Config& cfg) {
  if (!cfg.is_cascade()) throw ConfigError("config has no cascade section");
  const auto& cs = *cfg.cascade;
  CascadeSystem sys;
  sys.dim = cfg.dimension;
  sys.weights = to_eigen(cfg.weights, "topology.weights");
  sys.followers = cfg.m;
  sys.alpha = cs.alpha;
  const auto m = static_cast<std::size_t>(std::max(cfg.m, 0));
  const auto leaders = static_cast<std::size_t>(sys.weights.rows()) - m;
  const PerturbationConfig zero;
  for (std::size_t i = 0; i < m; ++i) {
    sys.k_eta.push_back(broadcast(cs.k_eta, i, "cascade.k_eta"));
    sys.h.push_back(broadcast(cs.h, i, "cascade.h"));
    sys.phi1.push_back(to_perturbation(cs.phi1.empty() ? zero : broadcast(cs.phi1, i, "cascade.phi1"),
                                       sys.dim, "cascade.phi1"));
    sys.phi2.push_back(to_perturbation(cs.phi2.empty() ? zero : broadcast(cs.phi2, i, "cascade.phi2"),
                                       sys.dim, "cascade.phi2"));
  }
  for (std::size_t l = 0; l < leaders; ++l) {
    sys.psi.push_back(to_perturbation(cs.psi.empty() ? zero : broadcast(cs.psi, l, "cascade.psi"),
                                      sys.dim, "cascade.psi"));
  }
  for (std::size_t k = 0; k < cs.eta0.size(); ++k) {
    sys.eta0.push_back(to_vec(cs.eta0[k], sys.dim, "cascade.eta0"));
  }
  sys.comm = to_comm(cfg);
  sys.dt = cfg.sim.dt_seconds;
  sys.t_end = cfg.sim.t_end_seconds;
  sys.record_interval = cfg.sim.record_interval_seconds;
  return sys;
}

}  // namespace containment::cli
