// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace sqwp {

namespace {

std::string blowup_message(double t, double h) {
  std::ostringstream os;
  os << "numerical blowup (NaN/Inf) in step at t=" << t << " with h=" << h;
  return os.str();
}

}  // namespace

NumericalBlowup::NumericalBlowup(double t_, double h_)
    : std::runtime_error(blowup_message(t_, h_)), t(t_), h(h_) {}

void TimeGrid::validate() const {
  if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
  if (steps < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
}

TimeGrid TimeGrid::with_max_step(double t0, double t1, double h_max) {
  const int steps = std::max(1, static_cast<int>(std::ceil((t1 - t0) / h_max - 1e-9)));
  return {t0, t1, steps};
}

void Rk4::step(const RhsFn& f, CVector& y, double t, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("rk4: h must be > 0");
  const double nudge = 1e-9 * h;
  k1_.resize(y.size());
  k2_.resize(y.size());
  k3_.resize(y.size());
  k4_.resize(y.size());
  f(t + nudge, y, k1_);
  tmp_ = y + (0.5 * h) * k1_;
  f(t + 0.5 * h, tmp_, k2_);
  tmp_ = y + (0.5 * h) * k2_;
  f(t + 0.5 * h, tmp_, k3_);
  tmp_ = y + h * k3_;
  f(t + h - nudge, tmp_, k4_);
  y += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  if (!y.allFinite()) throw NumericalBlowup(t, h);
}

CVector rk4_step(const RhsFn& f, const CVector& y, double t, double h) {
  Rk4 rk;
  CVector out = y;
  rk.step(f, out, t, h);
  return out;
}

CVector propagate(const RhsFn& f, CVector y, const TimeGrid& grid, const Observer& obs) {
  grid.validate();
  Rk4 rk;
  const double h = grid.h();
  if (obs) obs(grid.t0, y);
  for (int k = 0; k < grid.steps; ++k) {
    rk.step(f, y, grid.node(k), h);
    if (obs) obs(grid.node(k + 1), y);
  }
  return y;
}

namespace {

template <class Kernel>
RhsFn wrap(const HierarchyModel& model, Kernel kernel) {
  auto in = std::make_shared<StateTensor>(model.n_max(), model.dim());
  auto out = std::make_shared<StateTensor>(model.n_max(), model.dim());
  return [&model, in, out, kernel](double t, const CVector& y, CVector& dy) {
    in->data() = y;
    kernel(t, *in, model, *out);
    dy = out->data();
  };
}

}  // namespace

RhsFn hierarchy_rhs(const HierarchyModel& model) {
  return wrap(model, [](double t, const StateTensor& s, const HierarchyModel& m, StateTensor& o) {
    squeezed_rhs(t, s, m, o);
  });
}

RhsFn fock_hierarchy_rhs(const HierarchyModel& model) {
  return wrap(model, [](double t, const StateTensor& s, const HierarchyModel& m, StateTensor& o) {
    fock_rhs(t, s, m, o);
  });
}

double default_step(const HierarchyModel& model) {
  const double scale = model.packet().max_abs() * (model.n_max() + 1) * model.squeeze().coshr();
  return scale > 0.0 ? std::min(1e-3, 0.05 / scale) : 1e-3;
}

namespace {

std::vector<StateTensor> propagate_probes(const HierarchyModel& model, const TimeGrid& grid,
                                          HierarchyKind kind) {
  const int d = model.dim();
  std::vector<StateTensor> finals(d * d);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < d * d; ++j) {
    CMatrix e = CMatrix::Zero(d, d);
    e(j % d, j / d) = 1.0;
    const StateTensor st0 = init_tensor_unchecked(e, model.n_max());
    const RhsFn f = kind == HierarchyKind::fock ? fock_hierarchy_rhs(model) : hierarchy_rhs(model);
    StateTensor fin(model.n_max(), d);
    fin.data() = propagate(f, st0.data(), grid);
    finals[j] = std::move(fin);
  }
  return finals;
}

ChannelReport report_from_images(const std::vector<CMatrix>& images, int d) {
  ChannelReport rep;
  rep.choi = choi_from_images(images, d);
  rep.eigenvalues = hermitian_eigenvalues(rep.choi);
  rep.min_eigenvalue = rep.eigenvalues.front();
  rep.is_cp = rep.min_eigenvalue >= -1e-8;
  for (int j = 0; j < d * d; ++j) {
    const double want = (j % d == j / d) ? 1.0 : 0.0;
    rep.trace_preserving_residual =
        std::max(rep.trace_preserving_residual, std::abs(images[j].trace() - want));
  }
  return rep;
}

}  // namespace

ChannelReport hierarchy_channel(const HierarchyModel& model, const FieldState& field,
                                const TimeGrid& grid, HierarchyKind kind) {
  if (field.max_index() > model.n_max()) {
    throw std::invalid_argument("hierarchy_channel: field index beyond n_max");
  }
  const auto finals = propagate_probes(model, grid, kind);
  std::vector<CMatrix> images;
  for (const auto& st : finals) images.push_back(reduce_state(st, field));
  return report_from_images(images, model.dim());
}

ChannelReport hierarchy_extended_channel(const HierarchyModel& model, const TimeGrid& grid,
                                         HierarchyKind kind) {
  const auto finals = propagate_probes(model, grid, kind);
  std::vector<CMatrix> images;
  for (const auto& st : finals) images.push_back(extended_state(st));
  ChannelReport rep = report_from_images(images, model.dim());
  // Only the hierarchy diagonal carries unit trace; report that residual.
  rep.trace_preserving_residual = 0.0;
  const int d = model.dim();
  for (int j = 0; j < d * d; ++j) {
    const double want = (j % d == j / d) ? 1.0 : 0.0;
    for (int n = 0; n <= model.n_max(); ++n) {
      rep.trace_preserving_residual = std::max(
          rep.trace_preserving_residual, std::abs(finals[j].block(n, n).trace() - want));
    }
  }
  return rep;
}

VacuumDiffResult vacuum_in_squeezed_basis_diff(double r, double T, int n_max, const TimeGrid& grid,
                                               const CMatrix& rho0, double gamma) {
  const auto& b = two_level_basis();
  SLHTriple slh{b.id, std::sqrt(gamma) * b.sm, CMatrix::Zero(2, 2)};
  const SqueezeParams sq(r, 0.0);
  HierarchyModel model(slh, WavePacket::square(T), sq, n_max);
  VacuumDiffResult res;
  const FieldState field = FieldState::vacuum_in_squeezed_basis(sq, n_max, &res.coefficient_residual);
  if (std::abs(res.coefficient_residual) > 1e-6) {
    std::ostringstream os;
    os << "vacuum coefficients truncated at n_max=" << n_max << " lose "
       << res.coefficient_residual << " of their norm; renormalized";
    res.warning = os.str();
  }
  const double pe0 = rho0(1, 1).real();
  StateTensor view(n_max, 2);
  propagate(hierarchy_rhs(model), init_tensor(rho0, n_max).data(), grid,
            [&](double t, const CVector& y) {
              view.data() = y;
              const double pe = reduce_state(view, field)(1, 1).real();
              res.times.push_back(t);
              res.diff.push_back(std::abs(pe - pe0 * std::exp(-gamma * t)));
              res.sup = std::max(res.sup, res.diff.back());
            });
  return res;
}

}  // namespace sqwp
