// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-time correlations by quantum regression over the state tensor, and
// nonstationary fluorescence spectra
//   S(w, t) = Re int_0^{tau_max} dtau e^{i w tau} C(tau) w(tau)
// with C(tau) = <A(t) B(t + tau)>. With this one-sided normalization a
// Lorentzian C = e^{-tau/2} peaks at 2 and int S dw / pi = C(0).

#pragma once

#include <string>
#include <vector>

#include "sqwp/integrator.hpp"

namespace sqwp {

struct TwoTimeTensor {
  StateTensor lambda;  // Lambda^{(m,n)}_{t+tau,t}
  double reference_time = 0.0;
};

// Right-multiplies every block by a.
TwoTimeTensor qrt_boundary(const StateTensor& st, const CMatrix& a, double reference_time = 0.0);

struct CorrelationOptions {
  double tau_max = 12.0;
  int n_tau = 1200;             // tau samples are k * tau_max / n_tau, k = 0..n_tau
  double h_max = 1e-3;          // RK4 substep bound
  HierarchyKind kind = HierarchyKind::squeezed;
  bool subtract_coherent = false;  // C - <A>_t <B>_{t+tau}
};

struct Correlation {
  double reference_time = 0.0;
  std::vector<double> tau;
  std::vector<cd> values;
  cd mean_a{0.0, 0.0};  // <A>_t
};

// Propagates init_tensor(rho0) over [0, t], applies the boundary and
// propagates the two-time tensor over tau with the same generator.
Correlation two_time_correlation(const HierarchyModel& model, const FieldState& field,
                                 const CMatrix& rho0, double t, const CMatrix& a,
                                 const CMatrix& b, const CorrelationOptions& opt = {});

enum class Window { rect, hann };
std::string to_string(Window w);
Window window_from_string(const std::string& s);

struct SpectrumResult {
  double reference_time = 0.0;
  std::vector<double> omega;
  std::vector<double> values;
  Window window = Window::rect;
  double tau_max = 0.0;
};

std::vector<double> uniform_omega_grid(double lo, double hi, int points);

// Trapezoid transform on the uniform tau grid of c. Hann here is the half
// window 0.5 (1 + cos(pi tau / tau_max)).
SpectrumResult fluorescence_spectrum(const Correlation& c, const std::vector<double>& omega,
                                     Window window = Window::rect);

// sigma_+ / sigma_- spectra at each reference time, in parallel.
std::vector<SpectrumResult> reference_time_sweep(const HierarchyModel& model,
                                                 const FieldState& field, const CMatrix& rho0,
                                                 const std::vector<double>& t_list,
                                                 const std::vector<double>& omega,
                                                 const CorrelationOptions& opt = {},
                                                 Window window = Window::rect);

// Indices of strict local maxima whose value exceeds frac * global maximum.
std::vector<int> find_peaks(const SpectrumResult& s, double frac = 0.05);

// max |a - b| / max |a|, on a shared grid.
double relative_sup_difference(const SpectrumResult& a, const SpectrumResult& b);

// int S dw by the trapezoid rule.
double integrate_spectrum(const SpectrumResult& s);

}  // namespace sqwp
