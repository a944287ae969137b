#include <CLI11.hpp>
#include <omp.h>

#include <iostream>

#include "sfwm/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Photon-pair spectra from spliced photonic crystal fibers"};
  app.set_version_flag("--version", SFWM_VERSION);

  std::string subcommand;
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;

  app.add_option("subcommand", subcommand, "What to compute")
      ->required()
      ->check(CLI::IsMember(sfwm::run::subcommands()));
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Seed for the fit noise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (threads > 0) omp_set_num_threads(threads);

  sfwm::run::RunOptions options;
  options.config_path = config_path;
  if (!out_dir.empty()) options.out_dir = out_dir;
  options.seed = seed;
  return sfwm::run::run(subcommand, options, std::cerr);
}
