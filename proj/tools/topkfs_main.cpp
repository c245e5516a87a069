#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "topkfs/experiment.hpp"

using namespace topkfs;

int main(int argc, char** argv) {
  CLI::App app{"top-k regularized feature selection experiments"};
  app.require_subcommand(0, 1);

  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults, "print the full default config and exit");

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false, out_given = false, overwrite = false;

  std::vector<CLI::App*> subs;
  for (Command c : {Command::select, Command::sweep_k, Command::stability, Command::simulate,
                    Command::gradcheck, Command::approx_study}) {
    CLI::App* sub = app.add_subcommand(to_string(c), "");
    sub->add_option("--config", config_path, "config file (key = value sections)");
    sub->add_option("--set", overrides, "override, e.g. --set hyper.k=25")->take_all();
    sub->add_option("--out", out_dir, "output directory")->each([&](const std::string&) {
      out_given = true;
    });
    sub->add_option("--seed", seed, "run seed")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_flag("--overwrite", overwrite, "replace an existing run directory");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::cout << serialize_config(default_config());
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  try {
    ExperimentConfig cfg = default_config();
    if (const char* env_out = std::getenv("TOPKFS_OUT")) cfg.out_dir = env_out;
    if (!config_path.empty()) parse_config_file(config_path, cfg);
    for (const std::string& assignment : overrides) apply_override(assignment, cfg);

    cfg.command = command_from_string(app.get_subcommands().front()->get_name());
    if (seed_given) cfg.seed = seed;
    if (out_given) cfg.out_dir = out_dir;
    if (overwrite) cfg.overwrite = true;

    RunOutcome outcome = run(cfg);
    std::cerr << "wrote " << outcome.record_count << " record(s) to "
              << outcome.run_dir.string() << "\n";
    if (outcome.check_failed) {
      std::cerr << "gradcheck tolerance exceeded\n";
      return 2;
    }
    return 0;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
