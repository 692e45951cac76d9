// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Conditional evolution of the state tensor under photon counting and
// homodyne/heterodyne detection of the output field.
//
// With K rho = L rho_{mn} + xi S A_{mn} acting on the bra index and
// rho K^dag = rho_{mn} L^dag + xi^* B_{mn} S^dag on the ket index, the jump
// map is J rho = K rho K^dag and the unconditional derivative is R(rho). One
// step of size h uses the unnormalized updates
//   counting:  click -> h J rho,   no click -> rho + h (R(rho) - J rho)
//   homodyne:  +/-   -> (rho + h R(rho) +/- sqrt(h) (e^{-i phi'} K rho + e^{i phi'} rho K^dag)) / 2
// and divides the whole tensor by the trace of its physical combination.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqwp/hierarchy.hpp"

namespace sqwp {

class DegenerateRecord : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RecordKind { counting, homodyne, heterodyne };
std::string to_string(RecordKind k);

// Counter-based uniform draws in [0, 1) keyed by (seed, stream, step).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
  double uniform(std::uint64_t step, std::uint64_t lane = 0) const;
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

struct MeasurementRecord {
  RecordKind kind = RecordKind::counting;
  std::vector<double> times;     // step start times
  std::vector<int> outcomes;     // counting 0/1, homodyne +-1
  std::vector<int> quadrature;   // heterodyne: 0 for phi'=0, 1 for phi'=pi/2
  std::vector<double> dW;        // homodyne innovation
  std::vector<double> expected;  // Pr(J) for counting, sqrt(h)(P+ - P-) for homodyne
  double lo_phase = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Scratch space and operators for one trajectory; not shareable across threads.
class ConditionalStepper {
 public:
  ConditionalStepper(const HierarchyModel& model, FieldState field);

  double jump_probability(const StateTensor& ct, double t, double h);
  // Returns the outcome (0/1) after updating ct in place.
  int counting_step(StateTensor& ct, double t, double h, double u, double* pr_jump = nullptr);
  // Returns +1/-1 after updating ct in place; *signal receives sqrt(h)(P+ - P-).
  int homodyne_step(StateTensor& ct, double t, double h, double varphi, double u,
                    double* signal = nullptr);

  // Building blocks, exposed for tests.
  void apply_k(const StateTensor& in, double t, StateTensor& out) const;      // K rho
  void apply_kdag(const StateTensor& in, double t, StateTensor& out) const;   // rho K^dag
  void apply_jump(const StateTensor& in, double t, StateTensor& out);         // K rho K^dag
  double physical_trace(const StateTensor& st) const;

  std::size_t clamp_warnings() const { return clamp_warnings_; }

 private:
  void normalize(StateTensor& st) const;

  const HierarchyModel& model_;
  FieldState field_;
  StateTensor tmp_, jump_, drift_, k_, kd_;
  std::size_t clamp_warnings_ = 0;
};

double jump_probability(const StateTensor& ct, const HierarchyModel& model, double t, double h);

struct EnsembleConfig {
  RecordKind kind = RecordKind::counting;
  double lo_phase = 0.0;
  double t_end = 1.0;
  double h = 1e-3;
  int record_every = 100;  // steps between stored observable nodes
  std::uint64_t base_seed = 1;
  bool keep_records = false;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<double> pe_mean, pe_stderr, x_mean, y_mean, purity_mean;
  std::vector<double> jump_rate_mean, jump_rate_stderr;  // clicks per unit time per bin
  std::vector<int> jump_counts;                          // per trajectory
  std::vector<MeasurementRecord> records;                // when keep_records
  // Innovation sums per output bin: sum(outcome - expected) and its variance.
  std::vector<double> innovation_sum, innovation_var;
  int n_ok = 0;
  int n_degenerate = 0;
};

// Runs n_traj trajectories (OpenMP across trajectories). Observables are
// two-level quantities of the physical state.
EnsembleResult simulate_ensemble(const HierarchyModel& model, const FieldState& field,
                                 const CMatrix& rho0, const EnsembleConfig& cfg, int n_traj);

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};
// Sum over bins of innovation_sum^2 / innovation_var, chi-square with one
// degree of freedom per bin.
Chi2Result martingale_chi2(const EnsembleResult& r);

}  // namespace sqwp
