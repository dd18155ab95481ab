#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.h"

int main(int argc, char** argv) {
  using namespace containment::cli;

  CLI::App app{"Containment control simulator for networked multi-agent systems"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "scenario config (JSON)")->required();
    sub->add_option("--seed", seed, "overrides sim.seed");
    sub->add_option("--out", out_dir, "output directory");
  };

  auto* validate = app.add_subcommand("validate", "check topology, gains and comm settings");
  common(validate);
  validate->add_flag("--json", opts.json, "print the JSON report");

  auto* run = app.add_subcommand("run", "simulate and write the trace");
  common(run);

  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "repeat runs over one numeric parameter");
  common(sweep);
  sweep->add_option("--axis", axis, "config path, gains.<name>, gains.bandwidth or cascade.gain_multiplier")
      ->required();
  sweep->add_option("--values", values, "values for the axis")->required()->delimiter(',');

  auto* report = app.add_subcommand("report", "emit the certificate report");
  common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  opts.out_dir = out_dir;
  for (auto* sub : {validate, run, sweep, report}) {
    if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;
  }

  if (validate->parsed()) return cmd_validate(opts, std::cout, std::cerr);
  if (run->parsed()) return cmd_run(opts, std::cout, std::cerr);
  if (sweep->parsed()) return cmd_sweep(opts, axis, values, std::cout, std::cerr);
  return cmd_report(opts, std::cout, std::cerr);
}
