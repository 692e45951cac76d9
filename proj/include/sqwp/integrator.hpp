// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Fixed-step RK4, channel construction and physicality diagnostics.

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqwp/hierarchy.hpp"

namespace sqwp {

class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(double t, double h);
  double t;
  double h;
};

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  int steps = 1;

  double h() const { return (t1 - t0) / steps; }
  double node(int k) const { return t0 + k * h(); }
  void validate() const;
  // Uniform grid on [t0, t1] whose step does not exceed h_max.
  static TimeGrid with_max_step(double t0, double t1, double h_max);
};

using RhsFn = std::function<void(double t, const CVector& y, CVector& dy)>;
using Observer = std::function<void(double t, const CVector& y)>;

// Classical RK4. Stage times at the step ends are pulled inward by 1e-9 h so a
// discontinuous envelope whose edge sits on a node is always sampled from the
// inside of the current step.
class Rk4 {
 public:
  void step(const RhsFn& f, CVector& y, double t, double h);

 private:
  CVector k1_, k2_, k3_, k4_, tmp_;
};

CVector rk4_step(const RhsFn& f, const CVector& y, double t, double h);

// Integrates over the grid, calling the observer at every node including t0.
CVector propagate(const RhsFn& f, CVector y, const TimeGrid& grid, const Observer& obs = {});

// Wraps the hierarchy in the flat-vector interface.
RhsFn hierarchy_rhs(const HierarchyModel& model);
RhsFn fock_hierarchy_rhs(const HierarchyModel& model);

// min(1e-3, 0.05 / (max|xi| (n_max + 1) cosh r)).
double default_step(const HierarchyModel& model);

struct ChannelReport {
  CMatrix choi;
  std::vector<double> eigenvalues;  // ascending
  double min_eigenvalue = 0.0;
  bool is_cp = true;                // min_eigenvalue >= -1e-8
  double trace_preserving_residual = 0.0;
};

enum class HierarchyKind { squeezed, fock };

// rho0 -> reduce_state(propagate(init_tensor(rho0))): system to system.
ChannelReport hierarchy_channel(const HierarchyModel& model, const FieldState& field,
                                const TimeGrid& grid, HierarchyKind kind = HierarchyKind::squeezed);
// rho0 -> sum_{mn} rho^{(m,n)} kron |m><n|: system to system plus hierarchy.
ChannelReport hierarchy_extended_channel(const HierarchyModel& model, const TimeGrid& grid,
                                         HierarchyKind kind = HierarchyKind::squeezed);

struct VacuumDiffResult {
  std::vector<double> times;
  std::vector<double> diff;  // |P_e^hier(t) - P_e(0) e^{-Gamma t}|
  double sup = 0.0;
  double coefficient_residual = 0.0;
  std::string warning;
};

// Evolves the squeezed hierarchy with the field vacuum expressed in the
// squeezed-Fock basis and compares with exact amplitude damping. Uses
// L = sqrt(gamma) sigma_-, S = I, H = 0 and a square packet of length T.
VacuumDiffResult vacuum_in_squeezed_basis_diff(double r, double T, int n_max, const TimeGrid& grid,
                                               const CMatrix& rho0, double gamma = 1.0);

}  // namespace sqwp
