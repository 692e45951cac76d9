// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/markovian.hpp"

#include <cmath>
#include <numbers>

namespace sqwp {

CMatrix broadband_rhs(const CMatrix& rho, const SLHTriple& slh, const BroadbandParams& nm) {
  const CMatrix& L = slh.L;
  const CMatrix Ld = L.adjoint();
  const CMatrix cl = L * (L * rho - rho * L) - (L * rho - rho * L) * L;
  const CMatrix cld = Ld * (Ld * rho - rho * Ld) - (Ld * rho - rho * Ld) * Ld;
  return -I_UNIT * commutator(slh.H, rho) + (nm.N + 1.0) * dissipator(L, rho) +
         nm.N * dissipator(Ld, rho) + 0.5 * std::conj(nm.M) * cl + 0.5 * nm.M * cld;
}

RhsFn broadband_fn(const SLHTriple& slh, const BroadbandParams& nm) {
  const int d = slh.dim();
  return [slh, nm, d](double, const CVector& y, CVector& dy) {
    dy = vec(broadband_rhs(unvec(y, d), slh, nm));
  };
}

std::pair<double, double> bloch_rates(const BroadbandParams& nm) {
  if (std::abs(nm.M.imag()) > 1e-12) {
    throw std::invalid_argument("bloch_rates: M must be real; rotate the squeezing phase first");
  }
  return {nm.N + nm.M.real() + 0.5, nm.N - nm.M.real() + 0.5};
}

std::vector<ConvergencePoint> short_packet_convergence(double r, double phi,
                                                       const std::vector<double>& dt_list,
                                                       const SLHTriple& slh, const CMatrix& rho0,
                                                       int n_max) {
  const int d = slh.dim();
  if ((slh.S - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-12 ||
      slh.H.cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("short_packet_convergence: requires S = I and H = 0");
  }
  const SqueezeParams sq(r, phi);
  const BroadbandParams nm = broadband_nm(sq);
  std::vector<ConvergencePoint> out;
  for (double dt : dt_list) {
    HierarchyModel model(slh, WavePacket::square(dt), sq, n_max);
    const TimeGrid grid{0.0, dt, 400};
    StateTensor fin(n_max, d);
    fin.data() = propagate(hierarchy_rhs(model), init_tensor(rho0, n_max).data(), grid);
    const CMatrix bb = unvec(propagate(broadband_fn(slh, nm), vec(rho0), grid), d);
    const CMatrix diff = (CMatrix(fin.block(0, 0)) - bb) / dt;
    out.push_back({dt, operator_norm(diff)});
  }
  return out;
}

CMatrix quasi_markoffian_rhs(const CMatrix& rho, const QuasiMarkoffSpectra& s, double gamma,
                             double omega, double omega_a) {
  const auto& b = two_level_basis();
  const CMatrix& sp = b.sp;
  const CMatrix& sm = b.sm;
  const CMatrix P = sp * sm;
  const CMatrix Q = sm * sp;
  const CMatrix pRp = sp * rho * sp;
  const CMatrix mRm = sm * rho * sm;
  const CMatrix mRp = sm * rho * sp;
  const CMatrix pRm = sp * rho * sm;
  const cd em = std::polar(1.0, -2.0 * s.phi_L);
  const cd ep = std::conj(em);

  CMatrix g = (1.0 + s.N_A) * (P * rho + rho * P - pRp - mRm - 2.0 * mRp);
  g += s.N_A * (Q * rho + rho * Q - pRp - mRm - 2.0 * pRm);
  g += (1.0 + s.N_p) * (P * rho + rho * P + pRp + mRm - 2.0 * mRp);
  g += s.N_p * (Q * rho + rho * Q + pRp + mRm - 2.0 * pRm);
  g -= s.M_A * em * (Q * rho + rho * P - 2.0 * pRp - pRm - mRp);
  g -= std::conj(s.M_A) * ep * (P * rho + rho * Q - 2.0 * mRm - pRm - mRp);
  g -= s.M_p * em * (-Q * rho - rho * P - 2.0 * pRp + pRm + mRp);
  g -= std::conj(s.M_p) * ep * (-P * rho - rho * Q - 2.0 * mRm + pRm + mRp);

  CMatrix out = -0.25 * gamma * g;
  out += -0.5 * I_UNIT * omega * commutator(b.sx, rho);
  out += -0.5 * I_UNIT * omega_a * commutator(b.sz, rho);
  const CMatrix y = sp - sm;
  out += s.F * (commutator(b.sx, rho) - b.sz * rho * y - y * rho * b.sz);
  out += s.G * commutator(b.sz, commutator(b.sx, rho));
  return out;
}

namespace {

// Simpson integral of f(x0+u) - f(x0-u) over s = ln u in [ln a, ln b].
cd log_decade(const std::function<cd(double)>& f, double x0, double a, double b) {
  constexpr int n = 200;  // even
  const double s0 = std::log(a);
  const double hs = (std::log(b) - s0) / n;
  cd acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double u = std::exp(s0 + k * hs);
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += w * (f(x0 + u) - f(x0 - u));
  }
  return acc * hs / 3.0;
}

}  // namespace

cd principal_value(const std::function<cd(double)>& f, double x0, double scale) {
  // Tail: [scale, U], adding decades until a decade contributes nothing.
  cd tail = 0.0;
  double lo = scale;
  int quiet = 0;
  for (int k = 0; k < 14 && quiet < 2; ++k) {
    const cd c = log_decade(f, x0, lo, 10.0 * lo);
    tail += c;
    quiet = std::abs(c) <= 1e-13 * std::max(1.0, std::abs(tail)) ? quiet + 1 : 0;
    lo *= 10.0;
  }
  if (quiet < 2) throw IntegrationFailure("principal_value: tail did not converge by 1e14 * scale");
  // Inner decades toward the excluded point.
  const double e2 = 1e-2 * scale, e3 = 1e-3 * scale, e4 = 1e-4 * scale;
  const cd i2 = tail + log_decade(f, x0, e2, 1e-1 * scale) + log_decade(f, x0, 1e-1 * scale, scale);
  const cd i3 = i2 + log_decade(f, x0, e3, e2);
  const cd i4 = i3 + log_decade(f, x0, e4, e3);
  // The excluded piece is linear in the width to leading order.
  const cd r34 = (e3 * i4 - e4 * i3) / (e3 - e4);
  const cd r23 = (e2 * i3 - e3 * i2) / (e2 - e3);
  if (std::abs(r34 - r23) > 1e-6 * std::max(1.0, std::abs(r34))) {
    throw IntegrationFailure("principal_value: Richardson estimates disagree");
  }
  return r34;
}

std::pair<cd, cd> principal_value_fg(const std::function<double(double)>& N_of,
                                     const std::function<cd(double)>& M_of, double omega,
                                     double gamma, double phi_L) {
  const cd em = std::polar(1.0, -2.0 * phi_L);
  const double k2 = gamma / (2.0 * std::numbers::pi);
  auto gfun = [&](double delta) -> cd {
    const cd m = M_of(delta) * em;
    return m + std::conj(m);
  };
  auto ffun = [&](double delta) -> cd { return gfun(delta) + 2.0 * N_of(delta); };
  const cd pref = -0.25 * I_UNIT * k2;
  const double scale = std::max(1.0, gamma);
  return {pref * principal_value(ffun, -omega, scale), pref * principal_value(gfun, -omega, scale)};
}

CMatrix steady_state(const std::function<CMatrix(const CMatrix&)>& f, int dim) {
  const SuperOp s = superop_of(f, dim);
  CMatrix a = s.matrix;
  CVector rhs = CVector::Zero(dim * dim);
  for (int j = 0; j < dim * dim; ++j) a(0, j) = (j % dim == j / dim) ? 1.0 : 0.0;
  rhs(0) = 1.0;
  const CMatrix rho = unvec(a.fullPivLu().solve(rhs), dim);
  return 0.5 * (rho + rho.adjoint());
}

}  // namespace sqwp
