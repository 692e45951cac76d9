// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sqwp {

TwoTimeTensor qrt_boundary(const StateTensor& st, const CMatrix& a, double reference_time) {
  if (a.rows() != st.dim() || a.cols() != st.dim()) {
    throw std::invalid_argument("qrt_boundary: dimension mismatch");
  }
  TwoTimeTensor out{StateTensor(st.n_max(), st.dim()), reference_time};
  for (int m = 0; m <= st.n_max(); ++m) {
    for (int n = 0; n <= st.n_max(); ++n) out.lambda.block(m, n) = st.block(m, n) * a;
  }
  return out;
}

namespace {

RhsFn rhs_for(const HierarchyModel& model, HierarchyKind kind) {
  return kind == HierarchyKind::fock ? fock_hierarchy_rhs(model) : hierarchy_rhs(model);
}

CMatrix reduce_flat(const CVector& y, int n_max, int d, const FieldState& field) {
  StateTensor st(n_max, d);
  st.data() = y;
  return reduce_state(st, field);
}

}  // namespace

Correlation two_time_correlation(const HierarchyModel& model, const FieldState& field,
                                 const CMatrix& rho0, double t, const CMatrix& a,
                                 const CMatrix& b, const CorrelationOptions& opt) {
  if (t < 0.0) throw std::invalid_argument("two_time_correlation: t must be >= 0");
  if (opt.n_tau < 1 || !(opt.tau_max > 0.0)) {
    throw std::invalid_argument("two_time_correlation: need tau_max > 0 and n_tau >= 1");
  }
  const int nmax = model.n_max();
  const int d = model.dim();
  const RhsFn f = rhs_for(model, opt.kind);
  StateTensor st = init_tensor(rho0, nmax);
  if (t > 0.0) st.data() = propagate(f, st.data(), TimeGrid::with_max_step(0.0, t, opt.h_max));

  Correlation out;
  out.reference_time = t;
  out.mean_a = (a * reduce_state(st, field)).trace();
  CVector lam = qrt_boundary(st, a, t).lambda.data();
  CVector state = st.data();

  const double dtau = opt.tau_max / opt.n_tau;
  const int sub = std::max(1, static_cast<int>(std::ceil(dtau / opt.h_max - 1e-9)));
  const double h = dtau / sub;
  Rk4 rk_l, rk_s;
  auto sample = [&](double tau) {
    cd c = (b * reduce_flat(lam, nmax, d, field)).trace();
    if (opt.subtract_coherent) c -= out.mean_a * (b * reduce_flat(state, nmax, d, field)).trace();
    out.tau.push_back(tau);
    out.values.push_back(c);
  };
  sample(0.0);
  for (int k = 0; k < opt.n_tau; ++k) {
    for (int s = 0; s < sub; ++s) {
      const double tt = t + k * dtau + s * h;
      rk_l.step(f, lam, tt, h);
      if (opt.subtract_coherent) rk_s.step(f, state, tt, h);
    }
    sample((k + 1) * dtau);
  }
  return out;
}

std::string to_string(Window w) { return w == Window::hann ? "hann" : "rect"; }

Window window_from_string(const std::string& s) {
  if (s == "rect") return Window::rect;
  if (s == "hann") return Window::hann;
  throw std::invalid_argument("unknown window '" + s + "' (rect|hann)");
}

std::vector<double> uniform_omega_grid(double lo, double hi, int points) {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("omega grid: need hi > lo, points >= 2");
  std::vector<double> w(points);
  for (int i = 0; i < points; ++i) w[i] = lo + (hi - lo) * i / (points - 1);
  return w;
}

SpectrumResult fluorescence_spectrum(const Correlation& c, const std::vector<double>& omega,
                                     Window window) {
  const std::size_t n = c.tau.size();
  if (n < 2 || c.values.size() != n) throw std::invalid_argument("fluorescence_spectrum: need >= 2 samples");
  for (std::size_t i = 1; i < omega.size(); ++i) {
    if (!(omega[i] > omega[i - 1])) throw std::invalid_argument("fluorescence_spectrum: omega grid must increase");
  }
  const double tau_max = c.tau.back();
  const double dtau = tau_max / (n - 1);
  std::vector<cd> cw(n);
  for (std::size_t k = 0; k < n; ++k) {
    double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    if (window == Window::hann) w *= 0.5 * (1.0 + std::cos(std::numbers::pi * c.tau[k] / tau_max));
    cw[k] = w * dtau * c.values[k];
  }
  SpectrumResult s;
  s.reference_time = c.reference_time;
  s.omega = omega;
  s.window = window;
  s.tau_max = tau_max;
  s.values.resize(omega.size());
#pragma omp parallel for if (omega.size() * n > 200000)
  for (std::size_t i = 0; i < omega.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += (std::polar(1.0, omega[i] * c.tau[k]) * cw[k]).real();
    s.values[i] = acc;
  }
  return s;
}

std::vector<SpectrumResult> reference_time_sweep(const HierarchyModel& model,
                                                 const FieldState& field, const CMatrix& rho0,
                                                 const std::vector<double>& t_list,
                                                 const std::vector<double>& omega,
                                                 const CorrelationOptions& opt, Window window) {
  const auto& b = two_level_basis();
  std::vector<SpectrumResult> out(t_list.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const Correlation c = two_time_correlation(model, field, rho0, t_list[i], b.sp, b.sm, opt);
    out[i] = fluorescence_spectrum(c, omega, window);
  }
  return out;
}

std::vector<int> find_peaks(const SpectrumResult& s, double frac) {
  std::vector<int> peaks;
  if (s.values.size() < 3) return peaks;
  const double top = *std::max_element(s.values.begin(), s.values.end());
  for (std::size_t i = 1; i + 1 < s.values.size(); ++i) {
    const double v = s.values[i];
    if (v > s.values[i - 1] && v >= s.values[i + 1] && v > frac * top) peaks.push_back(static_cast<int>(i));
  }
  return peaks;
}

double relative_sup_difference(const SpectrumResult& a, const SpectrumResult& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("relative_sup_difference: grid mismatch");
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
    scale = std::max(scale, std::abs(a.values[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

double integrate_spectrum(const SpectrumResult& s) {
  double acc = 0.0;
  for (std::size_t i = 1; i < s.omega.size(); ++i) {
    acc += 0.5 * (s.values[i] + s.values[i - 1]) * (s.omega[i] - s.omega[i - 1]);
  }
  return acc;
}

}  // namespace sqwp
