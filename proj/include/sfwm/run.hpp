#pragma once

// Subcommand dispatch. Every subcommand renders its files in memory and
// writes them only after all work has succeeded, so a failed run leaves the
// output directory untouched.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sfwm/config.hpp"

namespace sfwm::run {

const std::vector<std::string>& subcommands();

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;  // overrides output_dir in the config
  std::uint64_t seed = 0;
};

// File name -> contents, ordered by name.
using Outputs = std::map<std::string, std::string>;

// Runs one subcommand against an already validated config. `config_bytes`
// is hashed into the manifest.
Outputs execute(const std::string& subcommand, const config::RunConfig& cfg,
                const std::string& config_bytes, std::uint64_t seed);

// Full pipeline: load, validate, execute, write. Returns the process exit
// code and prints a one-line JSON error record to `err` on failure.
int run(const std::string& subcommand, const RunOptions& options, std::ostream& err);

std::string sha256_hex(const std::string& bytes);

}  // namespace sfwm::run
