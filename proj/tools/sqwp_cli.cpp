// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// sqwp <experiment> --config <path> [--out <dir>] [--seed <u64>]
// Exit codes: 0 ok, 1 other failure, 2 invalid configuration, 3 numerical blowup.

#include <cstdint>
#include <iostream>

#include "CLI11.hpp"
#include "sqwp/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Squeezed wave-packet master-equation hierarchy experiments"};
  std::string experiment, config, out;
  std::uint64_t seed = 0;
  app.add_option("experiment", experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember(sqwp::experiment_names()));
  app.add_option("--config,-c", config, "YAML configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--out,-o", out, "Output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    sqwp::ExperimentConfig cfg = sqwp::load_config(config);
    if (!cfg.experiment.empty() && cfg.experiment != experiment) {
      throw sqwp::ConfigError("config names experiment '" + cfg.experiment + "' but '" + experiment +
                              "' was requested");
    }
    cfg.experiment = experiment;
    if (!out.empty()) cfg.out_dir = out;
    if (*seed_opt) cfg.numerics.seed = seed;
    const sqwp::RunSummary s = sqwp::run_experiment(cfg);
    for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << s.files.size() << " files and manifest.json to " << cfg.out_dir << '\n';
    return 0;
  } catch (const sqwp::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const sqwp::NumericalBlowup& e) {
    std::cerr << "error: " << e.what() << "; reduce numerics.h or n_max\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
