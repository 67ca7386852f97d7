#include "stratpatch/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace cli = stratpatch::cli;

int main(int argc, char** argv) {
  CLI::App app{"Optimal dynamic patching of stratified malware epidemics"};
  app.set_version_flag("--version", cli::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<int> steps;
  std::optional<double> tol;
  std::optional<std::string> mode;
  bool quiet = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "scenario YAML file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--steps", steps, "time grid cells")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "sweep tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--mode", mode, "patching mode")
        ->check(CLI::IsMember({"nonrep", "rep"}));
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };

  const std::vector<std::pair<cli::Subcommand, const char*>> commands = {
      {cli::Subcommand::Solve, "solve the optimal control and write trajectories"},
      {cli::Subcommand::Compare, "compare the optimal policy with the heuristics"},
      {cli::Subcommand::Figures, "run the replication suites"},
      {cli::Subcommand::Oracle, "check the sweep against the threshold oracle"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [command, help] : commands) {
    subs.push_back(app.add_subcommand(cli::to_string(command), help));
    add_common(subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  cli::ScenarioConfig config;
  try {
    config = cli::load_config(config_path);
    if (steps) config.solver.n_steps = *steps;
    if (tol) config.solver.tolerance = *tol;
    if (mode) config.mode = stratpatch::parse_patch_mode(*mode);
    config.solver.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kConfigError;
  }

  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (subs[k]->parsed()) {
      return cli::run(commands[k].first, config, {out_dir, quiet}, std::cerr);
    }
  }
  return cli::kConfigError;
}
