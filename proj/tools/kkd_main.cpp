#include <omp.h>

#include <iostream>

#include "CLI11.hpp"
#include "kkd/errors.hpp"
#include "kkd/experiments.hpp"

namespace {
constexpr const char* kVersion = "kkd 0.1.0";
}

int main(int argc, char** argv) {
  CLI::App app{"Kramers-Kronig optical detection simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "Run an experiment config (JSON)");
  run->add_option("config", config_path, "Path to the experiment config")->required();
  run->add_option("--seed", seed, "Override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--out", out_dir, "Base directory for relative output paths");
  run->add_option("--threads", threads, "OpenMP thread count (0 = default)");

  std::string experiment;
  CLI::App* describe = app.add_subcommand("describe", "Print an experiment's config schema");
  describe->add_option("experiment", experiment, "Experiment name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) {
      if (threads > 0) omp_set_num_threads(threads);
      kkd::RunOverrides ov;
      if (seed_set) ov.seed = seed;
      if (!out_dir.empty()) ov.out_dir = out_dir;
      kkd::RunResult res = kkd::run_experiment_file(config_path, ov);
      std::cout << res.summary.dump() << "\n";
      return 0;
    }
    if (describe->parsed()) {
      std::cout << kkd::describe_experiment(experiment) << "\n";
      return 0;
    }
  } catch (const kkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const kkd::PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cout << app.help();
  return 0;
}
