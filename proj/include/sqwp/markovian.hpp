// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reference Markovian evolutions: broadband squeezed vacuum and the
// quasi-Markoffian two-level master equation with sideband spectra.

#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sqwp/integrator.hpp"

namespace sqwp {

class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// -i[H,rho] + (N+1) D[L] + N D[L^dag] + M^*/2 [L,[L,rho]] + M/2 [L^dag,[L^dag,rho]]
CMatrix broadband_rhs(const CMatrix& rho, const SLHTriple& slh, const BroadbandParams& nm);
RhsFn broadband_fn(const SLHTriple& slh, const BroadbandParams& nm);

// (Gamma_x, Gamma_y) in units of Gamma for real M.
std::pair<double, double> bloch_rates(const BroadbandParams& nm);

struct ConvergencePoint {
  double dt = 0.0;
  double deviation = 0.0;  // operator norm, units of Gamma
};

// One square packet of width dt through the squeezed hierarchy versus the
// broadband equation over the same interval; compares the increments
// (rho(dt) - rho0)/dt. Requires S = I and H = 0.
std::vector<ConvergencePoint> short_packet_convergence(double r, double phi,
                                                       const std::vector<double>& dt_list,
                                                       const SLHTriple& slh, const CMatrix& rho0,
                                                       int n_max = 4);

struct QuasiMarkoffSpectra {
  double N_A = 0.0;
  double N_p = 0.0;  // N(omega_A + Omega)
  cd M_A{0.0, 0.0};
  cd M_p{0.0, 0.0};
  double phi_L = 0.0;
  cd F{0.0, 0.0};
  cd G{0.0, 0.0};
};

// Two-level quasi-Markoffian equation in the eight-group form. The G term is
// applied as G [sigma_z, [sigma_x, rho]].
CMatrix quasi_markoffian_rhs(const CMatrix& rho, const QuasiMarkoffSpectra& s, double gamma,
                             double omega, double omega_a = 0.0);

// P int f(x) / (x - x0) dx over the real line by symmetric exclusion around x0,
// Richardson-extrapolated over the exclusion width.
cd principal_value(const std::function<cd(double)>& f, double x0, double scale = 1.0);

// F and G with K^2 = gamma / (2 pi); N and M are functions of Delta = omega - omega_a.
std::pair<cd, cd> principal_value_fg(const std::function<double(double)>& N_of,
                                     const std::function<cd(double)>& M_of, double omega,
                                     double gamma, double phi_L);

// Null vector of the Liouvillian built from f, normalized to unit trace.
CMatrix steady_state(const std::function<CMatrix(const CMatrix&)>& f, int dim);

}  // namespace sqwp
