#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "containment/analysis.h"
#include "containment/sim.h"

namespace containment::cli {

using Matrix = std::vector<std::vector<double>>;

struct TrajectoryConfig {
  std::string kind;
  std::vector<double> p0;
  std::vector<double> v_d;
  std::vector<double> v0;
  std::optional<int> index;  // defaults to the agent id
};

struct AgentConfig {
  int id = 0;
  std::string model = "double_integrator";
  std::optional<std::string> drift;
  std::optional<Matrix> s1;
  std::optional<Matrix> s2;
  std::vector<double> p;  // followers
  std::vector<double> v;
  std::optional<TrajectoryConfig> trajectory;  // leaders
};

struct ControllerConfig {
  std::vector<int> agents;
  std::string variant;
  std::string psi_mode = "static";
  std::map<std::string, double> gains;
  std::vector<double> v_d;
  std::map<std::string, std::vector<double>> initial;
};

struct CommSection {
  double T_seconds = 0.1;
  double T_star_seconds = 1.5;
  double drop_prob = 0.0;
  double delay_max_seconds = 0.0;
  std::optional<double> delay_quantum_seconds;  // default T / 10
};

struct SimSection {
  double dt_seconds = 0.01;
  double t_end_seconds = 10.0;
  std::uint64_t seed = 1;
  double record_interval_seconds = 0.1;
};

struct OutputsSection {
  std::string csv_path = "trace.csv";
  std::optional<std::string> svg_path;
  std::optional<std::string> report_path;
  std::optional<std::string> audit_path;
  std::vector<double> snapshot_times_seconds;
};

struct PerturbationConfig {
  std::string kind = "zero";
  std::vector<double> amplitude;
  double omega = 1.0;
  double phase = 0.0;
  double rate = 1.0;
};

/// Per-follower lists of length 1 are broadcast to every follower; the
/// same holds for `psi` over leaders.
struct CascadeSection {
  int alpha = 1;
  std::vector<double> k_eta;
  Matrix h;
  std::vector<PerturbationConfig> phi1;
  std::vector<PerturbationConfig> phi2;
  std::vector<PerturbationConfig> psi;
  Matrix eta0;  // per agent
};

/// Scenario file. A file with a `cascade` section describes a cascade
/// system and carries no agents or controllers.
struct Config {
  std::string name;
  int dimension = 2;
  int m = 0;
  Matrix weights;
  std::vector<AgentConfig> agents;
  std::vector<ControllerConfig> controllers;
  CommSection comm;
  SimSection sim;
  OutputsSection outputs;
  std::optional<CascadeSection> cascade;

  bool is_cascade() const { return cascade.has_value(); }
};

/// Throws ConfigError; JSON syntax errors report line and column with the
/// offending line. Unknown keys anywhere are rejected.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);  // throws ConfigError, IoError

nlohmann::ordered_json to_json(const Config& cfg);
Config from_json(const nlohmann::json& doc);

Scenario to_scenario(const Config& cfg);
CascadeSystem to_cascade(const Config& cfg);
CommConfig to_comm(const Config& cfg);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace containment::cli
