// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Named experiments driven by a YAML configuration. Each run writes CSV
// artifacts and a manifest.json into one flat output directory.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqwp/fitting.hpp"
#include "sqwp/spectra.hpp"
#include "sqwp/trajectories.hpp"

namespace sqwp {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FieldCoeff {
  int m = 0;
  int n = 0;
  cd value{0.0, 0.0};
};

struct PhysicsConfig {
  double gamma = 1.0;
  double omega = 0.0;    // drive H = (omega/2) sigma_x
  double r = 0.0;
  double phi = 0.0;
  double delta_c = 0.0;  // packet detuning
  double r_markov = 0.2141;  // broadband comparison in decay-compare
  std::string packet = "square";  // square | gaussian | custom | none
  double T = 4.0;
  double center = 0.0;
  double sigma = 1.0;
  std::string packet_file;
  std::optional<int> n_max;           // empty = nmax_for_tolerance(1e-4, r)
  std::string field = "squeezed_vacuum";  // squeezed_vacuum | vacuum | number | custom
  int field_number = 0;
  std::vector<FieldCoeff> coeffs;
  std::string initial_state;          // empty = experiment default
};

struct NumericsConfig {
  std::optional<double> h;            // empty = default_step
  std::string hierarchy = "squeezed";  // squeezed | fock
  double t_end = 0.0;                 // 0 = experiment default
  double tau_max = 12.0;
  int n_tau = 1200;
  double omega_min = -16.0;
  double omega_max = 16.0;
  int omega_points = 321;
  Window window = Window::rect;
  bool subtract_coherent = false;
  std::vector<double> ref_times;
  std::vector<double> dt_list{1e-1, 1e-2, 1e-3};
  std::vector<int> nmax_sweep{1, 2, 3, 4, 5};
  int nodes = 64;
  double fit_tol = 1e-4;
  int n_traj = 200;
  std::string record = "counting";  // counting | homodyne | heterodyne
  double lo_phase = 0.0;
  int record_every = 125;
  int records_to_write = 0;
  std::uint64_t seed = 20261016;
};

struct ExperimentConfig {
  std::string experiment;
  PhysicsConfig physics;
  NumericsConfig numerics;
  std::string out_dir = "out";
  std::string source;  // config path, for the manifest
};

const std::vector<std::string>& experiment_names();

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
// Throws ConfigError with a message naming the offending key.
void validate(const ExperimentConfig& cfg);

// Resolved inputs shared by all experiments.
SLHTriple two_level_slh(double gamma, double omega);
CMatrix initial_state(const std::string& name, const SLHTriple& slh);
WavePacket make_packet(const PhysicsConfig& p);
int resolve_nmax(const PhysicsConfig& p);
FieldState make_field(const PhysicsConfig& p, int n_max, HierarchyKind kind, double* residual = nullptr);

struct RunSummary {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  std::string manifest_json;
};

// Validates, creates out_dir, runs, writes manifest.json. NumericalBlowup
// propagates to the caller.
RunSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace sqwp
