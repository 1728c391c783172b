// phmc: run coupled pHMC experiments from a flat config file and flags.
//
//   phmc run-coupling --preset linear-fig --seed 7 --out trace.csv
//   phmc average --preset doublewell --gamma 60 --runs 20
//   phmc audit --potential double-well --gamma 60 --dim 256
//   phmc compare-representations --dim 1000 --out cmp

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "phmc/errors.hpp"
#include "phmc/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned HMC coupling experiments"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help and exit");

  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  const char* commands[] = {"run-coupling", "average", "audit", "compare-representations"};
  for (const char* name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->set_help_flag("--help", "print this help and exit");  // --h is the step size
    sub->add_option("--config", config_path, "flat key = value config file");
    for (const std::string& key : phmc::config_keys()) {
      options[std::string(name) + "/" + key] = sub->add_option("--" + key, values[key]);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? phmc::kExitOk : phmc::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  phmc::Settings flags;
  for (const std::string& key : phmc::config_keys()) {
    if (options[command + "/" + key]->count() > 0) flags[key] = values[key];
  }

  phmc::Settings file;
  if (!config_path.empty()) {
    try {
      file = phmc::read_config_file(config_path);
    } catch (const phmc::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return phmc::kExitConfig;
    }
  }
  return phmc::run_command(command, file, flags, std::cout, std::cerr);
}
