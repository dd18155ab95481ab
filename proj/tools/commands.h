#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.h"

namespace containment::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitDivergence = 2, kExitIo = 3 };

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;  // overrides sim.seed
  std::filesystem::path out_dir = ".";
  bool json = false;                  // validate: print the JSON report instead of text
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  nlohmann::ordered_json certificate;  // topology numbers, when available

  bool pass() const;
  std::string text() const;
  nlohmann::ordered_json json() const;
};

ValidationReport validate_config(const Config& cfg);

/// Each command writes human-readable output to `out`, diagnostics to `err`
/// and returns an ExitCode.
int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const CommandOptions& opts, const std::string& axis,
              const std::vector<double>& values, std::ostream& out, std::ostream& err);
int cmd_report(const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// One row per recorded sample and agent:
/// `t,agent_id,role,p_1..p_N,v_1..v_N,err_norm,hull_dist`. Leaders carry
/// zero error and hull distance.
std::string trace_csv(const Trace& trace);
std::string cascade_csv(const CascadeTrace& trace);
/// Delivery log: `edge,seq,send_time,arrival_time,applied_time,accepted`.
std::string delivery_csv(const Trace& trace);
std::string schedule_csv(const std::vector<LinkSchedule>& schedules);
nlohmann::ordered_json trace_sidecar(const Config& cfg, const Trace& trace);

/// Writes through a temporary file in the same directory and renames it
/// into place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Sweep axes:
///   gains.<name>            multiplies that gain on every controller
///   gains.bandwidth         k_p c^2, k_d c, L_p c, L_d c, k_psi c
///   cascade.gain_multiplier k_eta and h times c
///   any other path          sets the numeric value at that path; a trailing
///                           `_seconds` may be omitted
/// Throws ConfigError for a missing or non-numeric path.
Config apply_axis(const Config& cfg, const std::string& axis, double value);

struct SweepRow {
  double value = 0.0;
  double final_error = 0.0;
  double steady_state_bound = 0.0;  // sup of the error norm over the last 20%
  double max_hull_distance = 0.0;   // at t_end; zero for cascade runs
};

/// Independent runs are executed concurrently; rows keep the order of `values`.
std::vector<SweepRow> run_sweep(const Config& cfg, const std::string& axis,
                                const std::vector<double>& values, std::uint64_t seed);
std::string sweep_csv(const std::string& axis, const std::vector<SweepRow>& rows);

/// Sup over the last 20% of the recorded position error norms.
double trace_steady_state_bound(const Trace& trace);

}  // namespace containment::cli
