// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scalar fits of the broadband squeezing parameter r_M to wave-packet
// dynamics, plus small least-squares curve fits used to characterize decays
// and spectral line shapes.

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sqwp/markovian.hpp"

namespace sqwp {

struct FitResult {
  double r_M = 0.0;
  double objective_value = 0.0;
  int n_evals = 0;
  std::pair<double, double> bracket{0.0, 0.0};
  bool interior = true;  // false when an endpoint beat every interior probe
  std::string flag;
};

// Golden-section search until the interval is shorter than tol.
FitResult minimize_scalar(const std::function<double(double)>& objective,
                          std::pair<double, double> bracket, double tol = 1e-4);

// Density matrices sampled at increasing times.
struct SampledSolution {
  std::vector<double> t;
  std::vector<CMatrix> rho;
};

std::vector<double> uniform_nodes(double t0, double t1, int count = 64);

// Integrates f from t = 0 and samples at the nodes; RK4 substeps never
// straddle a node.
SampledSolution sample_solution(const RhsFn& f, const CMatrix& rho0, const std::vector<double>& nodes,
                                double h_max = 1e-3);
SampledSolution sample_hierarchy(const HierarchyModel& model, const FieldState& field,
                                 const CMatrix& rho0, const std::vector<double>& nodes,
                                 double h_max = 1e-3, HierarchyKind kind = HierarchyKind::squeezed);
SampledSolution sample_broadband(double r, double phi, const SLHTriple& slh, const CMatrix& rho0,
                                 const std::vector<double>& nodes, double h_max = 1e-3);

// sum_i (x_wp - x_M)^2 + (y_wp - y_M)^2 with the broadband equation at r_M.
double bloch_objective(double r_M, const SampledSolution& wp, const CMatrix& rho0,
                       const SLHTriple& slh);
// sum_i (P_wp - P_M)^2.
double excitation_objective(double r_M, const SampledSolution& wp, const CMatrix& rho0,
                            const SLHTriple& slh);

// Broadband r_M whose steady excitation N / (2N + 1) equals pe.
double r_from_steady_excitation(double pe);

// Slope fit of ln|v| against t; returns the decay rate.
double log_slope_rate(const std::vector<double>& t, const std::vector<double>& v);

struct CurveFit {
  std::vector<double> params;
  double rss = 0.0;
  bool converged = false;
};

using Model = std::function<double(const std::vector<double>& p, double x)>;

// Levenberg-Marquardt from each start; keeps the lowest residual.
CurveFit least_squares(const Model& model, const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<std::vector<double>>& starts);

// A e^{-k t} + C
CurveFit fit_single_exponential(const std::vector<double>& t, const std::vector<double>& y);
// A e^{-k t} + B e^{-q t} + C
CurveFit fit_double_exponential(const std::vector<double>& t, const std::vector<double>& y);
// a g^2 / (w^2 + g^2) + c
CurveFit fit_single_lorentzian(const std::vector<double>& w, const std::vector<double>& s);
// a g^2 / (w^2 + g^2) + b q^2 / (w^2 + q^2) + c
CurveFit fit_double_lorentzian(const std::vector<double>& w, const std::vector<double>& s);

}  // namespace sqwp
