#include <CLI11.hpp>
#include <cstdint>
#include <string>

#include "evoflow/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"evoflow: replicator flows, natural-gradient search and oracles"};
  app.require_subcommand(1);

  std::string config_path;
  evoflow::CliOverrides overrides;
  std::string output;
  std::string format;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "path to the experiment config (JSON)")
      ->required();
  CLI::Option* run_output =
      run->add_option("--output", output, "override the trajectory output path");
  CLI::Option* run_format =
      run->add_option("--format", format, "override the output format (csv|json)")
          ->check(CLI::IsMember({"csv", "json"}));
  CLI::Option* run_seed =
      run->add_option("--seed", seed, "override the sampling seed");

  std::string verify_report;
  CLI::App* verify = app.add_subcommand("verify", "run every invariant suite");
  verify->add_option("--output", verify_report, "write the verification report here");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand(verify)) return evoflow::run_verify_command(verify_report);

  if (*run_output) overrides.output_path = output;
  if (*run_format) overrides.format = format;
  if (*run_seed) overrides.seed = seed;
  return evoflow::run_experiment_file(config_path, overrides);
}
