#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ppn/kinematics.hpp"
#include "ppn/sweep.hpp"

// Run configuration shared by the CLI subcommands: vehicle and integrator
// parameters, sweep grids, and training hyperparameters. Values come from
// built-in defaults, then an optional key=value file, then command-line
// flags, in that order.

namespace ppn {

struct RunConfig {
  VehicleParams vehicle;        // theta0 is radians here; the file key is degrees
  IntegratorConfig integrator;
  GridSpec grid = GridSpec::defaults();
  int threads = 0;              // 0 = hardware concurrency
  std::uint32_t seed = 1;
  std::int64_t epochs_gain = 20000;   // problem A regressor
  std::int64_t epochs_pair = 40000;   // problem B regressor
  double learning_rate = 1e-3;
  double split_fraction = 0.8;
};

// Parses a key=value file ('#' starts a comment, blank lines ignored).
// Grid keys take start:stop:step ranges. Unknown keys are an error — a typo
// silently falling back to a default would poison a long sweep.
RunConfig load_config(const std::filesystem::path& path);

// Applies one key=value assignment. Exposed for the loader and for tests.
void apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace ppn
