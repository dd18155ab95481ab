#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.h"
#include "support.h"

namespace containment::cli {
namespace {

namespace fs = std::filesystem;
using containment::testing::bundled;
using containment::testing::scenario_path;

const std::vector<std::string> kBundled = {"example1_fullstate", "example1_outputfb",
                                           "example2_nonlinear", "oscillator_harmonic",
                                           "oscillator_output",  "lemma_cascade"};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("containment_test_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

fs::path write_config(const TempDir& dir, const std::string& name, const Config& cfg) {
  const fs::path p = dir.path() / (name + ".json");
  write_file_atomic(p, to_json(cfg).dump(2));
  return p;
}

TEST(Config, SyntaxErrorReportsLine) {
  const std::string text = "{\n  \"name\": \"x\",\n  \"dimension\": 2,,\n}\n";
  try {
    parse_config(text);
    FAIL() << "expected a parse error";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("\"dimension\": 2,,"), std::string::npos) << what;
  }
}

TEST(Config, UnknownKeysRejected) {
  auto doc = nlohmann::json::parse(to_json(bundled("example1_fullstate")).dump());
  doc["colour"] = "red";
  EXPECT_THROW(from_json(doc), ConfigError);
  doc.erase("colour");
  doc["comm"]["T"] = 0.1;
  EXPECT_THROW(from_json(doc), ConfigError);
  doc["comm"].erase("T");
  doc["controllers"][0]["gains"]["k_q"] = 1.0;
  EXPECT_THROW(from_json(doc), ConfigError);
  doc["controllers"][0]["gains"].erase("k_q");
  EXPECT_NO_THROW(from_json(doc));
}

TEST(Config, TypeErrorsNamePath) {
  auto doc = nlohmann::json::parse(to_json(bundled("example1_fullstate")).dump());
  doc["sim"]["dt_seconds"] = "fast";
  try {
    from_json(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("sim.dt_seconds"), std::string::npos);
  }
}

TEST(Config, RoundTripIsStable) {
  for (const auto& name : kBundled) {
    const Config a = bundled(name);
    const auto ja = to_json(a);
    const Config b = parse_config(ja.dump());
    EXPECT_EQ(to_json(b), ja) << name;
  }
}

TEST(Config, MissingFileIsIoError) { EXPECT_THROW(load_config("/nonexistent/cfg.json"), IoError); }

TEST(Validate, BundledScenariosPass) {
  for (const auto& name : kBundled) {
    const auto rep = validate_config(bundled(name));
    EXPECT_TRUE(rep.pass()) << name << "\n" << rep.text();
  }
}

TEST(Validate, RealRootsDiagnostic) {
  Config cfg = bundled("example1_fullstate");
  cfg.controllers[0].gains["k_p"] = 4.0;
  cfg.controllers[0].gains["k_d"] = 1.0;
  const auto rep = validate_config(cfg);
  EXPECT_FALSE(rep.pass());
  EXPECT_NE(rep.text().find("real-roots condition"), std::string::npos);
}

TEST(Validate, ZeroInDegreeFollowerFails) {
  Config cfg = bundled("example1_fullstate");
  for (auto& w : cfg.weights[3]) w = 0.0;
  for (auto& row : cfg.weights) row[3] = 0.0;
  const auto rep = validate_config(cfg);
  EXPECT_FALSE(rep.pass());
  EXPECT_NE(rep.text().find("not reachable"), std::string::npos);
  EXPECT_NE(rep.text().find(" 4"), std::string::npos);
}

TEST(Validate, ControllerCoverage) {
  Config cfg = bundled("example1_fullstate");
  cfg.controllers[0].agents = {1, 2, 3, 4, 5};
  EXPECT_FALSE(validate_config(cfg).pass());
  cfg.controllers[0].agents = {1, 2, 3, 4, 5, 6, 7};
  EXPECT_FALSE(validate_config(cfg).pass());
}

TEST(Validate, JsonReportCarriesCertificate) {
  const auto j = validate_config(bundled("example1_fullstate")).json();
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_LT(j["certificate"]["spectral_radius"].get<double>(), 1.0);
}

TEST(Commands, RunWritesExpectedFilesDeterministically) {
  TempDir dir("run");
  Config cfg = bundled("example1_fullstate");
  cfg.outputs.svg_path.reset();
  cfg.outputs.report_path.reset();
  const fs::path cfg_path = write_config(dir, "cfg", cfg);
  CommandOptions opts;
  opts.config_path = cfg_path.string();
  opts.out_dir = dir.path() / "a";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(opts, out, err), kExitOk) << err.str();
  const fs::path csv = opts.out_dir / cfg.outputs.csv_path;
  const std::string first = slurp(csv);
  std::size_t lines = 0;
  for (char c : first) lines += c == '\n';
  EXPECT_EQ(lines, 1u + 10u * 401u);
  EXPECT_EQ(first.substr(0, first.find('\n')), "t,agent_id,role,p_1,p_2,v_1,v_2,err_norm,hull_dist");
  EXPECT_FALSE(fs::exists(opts.out_dir / "example1_fullstate.svg"));
  EXPECT_TRUE(fs::exists(opts.out_dir / "example1_fullstate.meta.json"));
  EXPECT_TRUE(fs::exists(opts.out_dir / "example1_fullstate.schedule.csv"));
  for (const auto& e : fs::directory_iterator(opts.out_dir)) {
    EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos);
  }

  opts.out_dir = dir.path() / "b";
  ASSERT_EQ(cmd_run(opts, out, err), kExitOk);
  EXPECT_EQ(slurp(opts.out_dir / cfg.outputs.csv_path), first);

  opts.seed = 1234;
  opts.out_dir = dir.path() / "c";
  ASSERT_EQ(cmd_run(opts, out, err), kExitOk);
  EXPECT_NE(slurp(opts.out_dir / cfg.outputs.csv_path), first);
}

TEST(Commands, RunWritesSvgWhenConfigured) {
  TempDir dir("svg");
  Config cfg = bundled("oscillator_harmonic");
  cfg.sim.t_end_seconds = 4.0;
  cfg.outputs.snapshot_times_seconds = {0.0, 2.0, 4.0};
  CommandOptions opts;
  opts.config_path = write_config(dir, "cfg", cfg).string();
  opts.out_dir = dir.path();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(opts, out, err), kExitOk) << err.str();
  const std::string svg = slurp(dir.path() / *cfg.outputs.svg_path);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Commands, ExitCodes) {
  TempDir dir("codes");
  std::ostringstream out, err;
  CommandOptions opts;
  opts.out_dir = dir.path();

  opts.config_path = (dir.path() / "missing.json").string();
  EXPECT_EQ(cmd_validate(opts, out, err), kExitIo);

  Config bad = bundled("example1_fullstate");
  bad.controllers[0].gains["k_d"] = 1.0;
  opts.config_path = write_config(dir, "bad", bad).string();
  EXPECT_EQ(cmd_validate(opts, out, err), kExitValidation);
  EXPECT_EQ(cmd_run(opts, out, err), kExitValidation);

  Config stiff = bundled("example1_fullstate");
  stiff.controllers[0].gains["k_p"] = 1e6;
  stiff.controllers[0].gains["k_d"] = 2.5e3;
  opts.config_path = write_config(dir, "stiff", stiff).string();
  EXPECT_EQ(cmd_validate(opts, out, err), kExitOk);
  EXPECT_EQ(cmd_run(opts, out, err), kExitDivergence);

  const fs::path garbage = dir.path() / "garbage.json";
  write_file_atomic(garbage, "{ not json");
  opts.config_path = garbage.string();
  err.str("");
  EXPECT_EQ(cmd_validate(opts, out, err), kExitValidation);
  EXPECT_NE(err.str().find("line 1"), std::string::npos);

  Config ok = bundled("example1_fullstate");
  ok.outputs.csv_path = "blocked/trace.csv";
  write_file_atomic(dir.path() / "blocked", "a file where a directory should be");
  opts.config_path = write_config(dir, "ok", ok).string();
  ok.sim.t_end_seconds = 1.0;
  opts.config_path = write_config(dir, "ok", ok).string();
  EXPECT_EQ(cmd_run(opts, out, err), kExitIo);
}

TEST(Sweep, ApplyAxis) {
  const Config cfg = bundled("example1_fullstate");
  EXPECT_DOUBLE_EQ(apply_axis(cfg, "comm.T_star", 0.5).comm.T_star_seconds, 0.5);
  EXPECT_DOUBLE_EQ(apply_axis(cfg, "comm.T_star_seconds", 0.7).comm.T_star_seconds, 0.7);
  EXPECT_DOUBLE_EQ(apply_axis(cfg, "gains.k_p", 2.0).controllers[0].gains.at("k_p"), 8.0);
  const Config bw = apply_axis(cfg, "gains.bandwidth", 2.0);
  EXPECT_DOUBLE_EQ(bw.controllers[0].gains.at("k_p"), 16.0);
  EXPECT_DOUBLE_EQ(bw.controllers[0].gains.at("k_d"), 8.0);
  EXPECT_DOUBLE_EQ(bw.controllers[0].gains.at("L_p"), 8.0);
  EXPECT_EQ(apply_axis(cfg, "sim.seed", 9).sim.seed, 9u);
  EXPECT_DOUBLE_EQ(apply_axis(cfg, "agents.0.initial.p.1", 3.5).agents[0].p[1], 3.5);
  EXPECT_THROW(apply_axis(cfg, "name", 1.0), ConfigError);
  EXPECT_THROW(apply_axis(cfg, "comm.nope", 1.0), ConfigError);
  EXPECT_THROW(apply_axis(cfg, "gains.k_q", 1.0), ConfigError);
  EXPECT_THROW(apply_axis(cfg, "cascade.gain_multiplier", 2.0), ConfigError);
  const Config casc = apply_axis(bundled("lemma_cascade"), "cascade.gain_multiplier", 3.0);
  EXPECT_DOUBLE_EQ(casc.cascade->k_eta[0], 6.0);
  EXPECT_DOUBLE_EQ(casc.cascade->h[0][0], 6.0);
}

TEST(Sweep, SingleValueEqualsRun) {
  Config cfg = bundled("example1_fullstate");
  cfg.sim.t_end_seconds = 10.0;
  const auto rows = run_sweep(cfg, "comm.T_star", {cfg.comm.T_star_seconds}, cfg.sim.seed);
  ASSERT_EQ(rows.size(), 1u);
  const Trace tr = run(to_scenario(cfg), cfg.sim.seed);
  EXPECT_EQ(rows[0].final_error, tr.samples.back().pos_error.norm());
}

TEST(Sweep, CommandRejectsNonNumericAxis) {
  TempDir dir("sweep");
  CommandOptions opts;
  opts.config_path = scenario_path("example1_fullstate");
  opts.out_dir = dir.path();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_sweep(opts, "name", {1.0}, out, err), kExitValidation);
  EXPECT_NE(err.str().find("not numeric"), std::string::npos);
}

TEST(Sweep, CommandWritesTable) {
  TempDir dir("sweep_ok");
  Config cfg = bundled("lemma_cascade");
  cfg.sim.t_end_seconds = 5.0;
  CommandOptions opts;
  opts.config_path = write_config(dir, "cfg", cfg).string();
  opts.out_dir = dir.path();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_sweep(opts, "cascade.gain_multiplier", {1.0, 2.0}, out, err), kExitOk) << err.str();
  const std::string table = slurp(dir.path() / "lemma_cascade.sweep.csv");
  EXPECT_EQ(table, out.str());
  EXPECT_EQ(table.rfind("cascade.gain_multiplier,final_error,steady_state_bound,max_hull_dist\n", 0), 0u);
}

TEST(Report, CascadeReportHasEstimates) {
  TempDir dir("report");
  Config cfg = bundled("lemma_cascade");
  cfg.sim.t_end_seconds = 10.0;
  cfg.outputs.report_path.reset();
  CommandOptions opts;
  opts.config_path = write_config(dir, "cfg", cfg).string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_report(opts, out, err), kExitOk) << err.str();
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_GT(j["estimates"]["pairs_checked"].get<int>(), 0);
  EXPECT_EQ(j["estimates"]["violations"].get<int>(), 0);
  EXPECT_TRUE(j["certificate"]["small_gain"].get<bool>());
}

}  // namespace
}  // namespace containment::cli
