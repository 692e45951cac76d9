// Copyright 2026 The sqwp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqwp/trajectories.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sqwp {

std::string to_string(RecordKind k) {
  switch (k) {
    case RecordKind::counting: return "counting";
    case RecordKind::homodyne: return "homodyne";
    case RecordKind::heterodyne: return "heterodyne";
  }
  return "unknown";
}

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double CounterRng::uniform(std::uint64_t step, std::uint64_t lane) const {
  std::uint64_t z = splitmix(seed_);
  z = splitmix(z ^ (stream_ * 0xd1342543de82ef95ULL));
  z = splitmix(z ^ step);
  z = splitmix(z ^ (lane + 0x632be59bd9b4e019ULL));
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

ConditionalStepper::ConditionalStepper(const HierarchyModel& model, FieldState field)
    : model_(model),
      field_(std::move(field)),
      tmp_(model.n_max(), model.dim()),
      jump_(model.n_max(), model.dim()),
      drift_(model.n_max(), model.dim()),
      k_(model.n_max(), model.dim()),
      kd_(model.n_max(), model.dim()) {
  if (field_.max_index() > model.n_max()) {
    throw std::invalid_argument("ConditionalStepper: field index beyond n_max");
  }
}

namespace {

// out_{mn} = L in_{mn} + xi S A_{mn}            (ket side, dagger = false)
// out_{mn} = in_{mn} L^dag + xi^* B_{mn} S^dag  (bra side, dagger = true)
template <int D>
void k_kernel(const HierarchyModel& model, const StateTensor& in, double t, StateTensor& out, bool dagger) {
  using Mat = Eigen::Matrix<cd, D, D>;
  using CMap = Eigen::Map<const Mat>;
  const int d = in.dim();
  const int nmax = in.n_max();
  const int side = in.side();
  const Eigen::Index bs = in.block_size();
  const cd* src = in.data().data();
  cd* dst = out.data().data();
  const bool s_id = model.s_is_identity();
  const Mat L = model.slh().L;
  const Mat Ld = L.adjoint();
  const Mat S = model.slh().S;
  const Mat Sd = S.adjoint();
  cd xi = model.packet().sample(t);
  const double ch = model.squeeze().coshr();
  cd se = model.squeeze().sinhr() * model.squeeze().e2iphi();
  if (dagger) {
    xi = std::conj(xi);
    se = std::conj(se);
  }
  auto blk = [&](int m, int n) { return CMap(src + (static_cast<Eigen::Index>(m) * side + n) * bs, d, d); };
  for (int m = 0; m <= nmax; ++m) {
    for (int n = 0; n <= nmax; ++n) {
      // Neighbour index that moves: m for K, n for K^dag.
      const int k = dagger ? n : m;
      Mat a = Mat::Zero(d, d);
      if (k > 0) a += (ch * std::sqrt(double(k))) * (dagger ? blk(m, n - 1) : blk(m - 1, n));
      if (k < nmax) a -= (se * std::sqrt(double(k + 1))) * (dagger ? blk(m, n + 1) : blk(m + 1, n));
      Eigen::Map<Mat> o(dst + (static_cast<Eigen::Index>(m) * side + n) * bs, d, d);
      if (dagger) {
        o.noalias() = blk(m, n) * Ld;
        if (s_id) o += xi * a;
        else o.noalias() += xi * (a * Sd);
      } else {
        o.noalias() = L * blk(m, n);
        if (s_id) o += xi * a;
        else o.noalias() += xi * (S * a);
      }
    }
  }
}

void k_apply(const HierarchyModel& model, const StateTensor& in, double t, StateTensor& out, bool dagger) {
  if (out.n_max() != in.n_max() || out.dim() != in.dim()) out = StateTensor(in.n_max(), in.dim());
  if (in.dim() == 2) {
    k_kernel<2>(model, in, t, out, dagger);
  } else {
    k_kernel<Eigen::Dynamic>(model, in, t, out, dagger);
  }
}

}  // namespace

void ConditionalStepper::apply_k(const StateTensor& in, double t, StateTensor& out) const {
  k_apply(model_, in, t, out, false);
}

void ConditionalStepper::apply_kdag(const StateTensor& in, double t, StateTensor& out) const {
  k_apply(model_, in, t, out, true);
}

void ConditionalStepper::apply_jump(const StateTensor& in, double t, StateTensor& out) {
  apply_kdag(in, t, kd_);
  apply_k(kd_, t, out);
}

double ConditionalStepper::physical_trace(const StateTensor& st) const {
  cd tr = 0.0;
  for (const auto& [mn, c] : field_.coeffs) tr += c * st.block(mn.first, mn.second).trace();
  return tr.real();
}

void ConditionalStepper::normalize(StateTensor& st) const {
  const double tr = physical_trace(st);
  if (!(std::abs(tr) > 1e-300) || !std::isfinite(tr)) {
    throw DegenerateRecord("conditional state has zero physical trace");
  }
  st.data() /= tr;
}

double ConditionalStepper::jump_probability(const StateTensor& ct, double t, double h) {
  apply_jump(ct, t, jump_);
  const double p = h * physical_trace(jump_);
  if (p < -1e-9) ++clamp_warnings_;
  return std::clamp(p, 0.0, 1.0);
}

int ConditionalStepper::counting_step(StateTensor& ct, double t, double h, double u,
                                      double* pr_jump) {
  const double tm = t + 0.5 * h;
  const double p = jump_probability(ct, tm, h);  // fills jump_
  if (pr_jump) *pr_jump = p;
  if (u < p) {
    ct.data() = jump_.data();
    normalize(ct);
    return 1;
  }
  squeezed_rhs(tm, ct, model_, drift_);
  ct.data() += h * (drift_.data() - jump_.data());
  normalize(ct);
  return 0;
}

int ConditionalStepper::homodyne_step(StateTensor& ct, double t, double h, double varphi,
                                      double u, double* signal) {
  const double tm = t + 0.5 * h;
  apply_k(ct, tm, k_);
  apply_kdag(ct, tm, kd_);
  squeezed_rhs(tm, ct, model_, drift_);
  tmp_.data() = std::polar(1.0, -varphi) * k_.data() + std::polar(1.0, varphi) * kd_.data();
  const double sq = std::sqrt(h);
  const double s = physical_trace(tmp_);
  double p_plus = 0.5 * (1.0 + sq * s);
  if (p_plus < -1e-9 || p_plus > 1.0 + 1e-9) ++clamp_warnings_;
  p_plus = std::clamp(p_plus, 0.0, 1.0);
  if (signal) *signal = sq * (2.0 * p_plus - 1.0);
  const int sign = u < p_plus ? 1 : -1;
  ct.data() = 0.5 * (ct.data() + h * drift_.data() + (sign * sq) * tmp_.data());
  normalize(ct);
  return sign;
}

double jump_probability(const StateTensor& ct, const HierarchyModel& model, double t, double h) {
  ConditionalStepper s(model, FieldState::squeezed_vacuum());
  return s.jump_probability(ct, t, h);
}

namespace {

struct TrajectoryOut {
  std::vector<double> pe, x, y, purity, clicks, innov, innov_var;
  int jumps = 0;
  bool ok = true;
  MeasurementRecord record;
};

}  // namespace

EnsembleResult simulate_ensemble(const HierarchyModel& model, const FieldState& field,
                                 const CMatrix& rho0, const EnsembleConfig& cfg, int n_traj) {
  if (n_traj < 1) throw std::invalid_argument("simulate_ensemble: n_traj must be >= 1");
  if (model.dim() != 2) throw std::invalid_argument("simulate_ensemble: two-level systems only");
  const int steps = std::max(1, static_cast<int>(std::lround(cfg.t_end / cfg.h)));
  const int every = std::max(1, cfg.record_every);
  const int bins = (steps + every - 1) / every;
  const double h = cfg.t_end / steps;
  const auto& b = two_level_basis();
  const StateTensor st0 = init_tensor(rho0, model.n_max());

  std::vector<TrajectoryOut> outs(n_traj);
#pragma omp parallel
  {
    ConditionalStepper stepper(model, field);
#pragma omp for schedule(dynamic, 8)
    for (int i = 0; i < n_traj; ++i) {
      TrajectoryOut& o = outs[i];
      const CounterRng rng(cfg.base_seed, static_cast<std::uint64_t>(i));
      StateTensor ct = st0;
      o.clicks.assign(bins, 0.0);
      o.innov.assign(bins, 0.0);
      o.innov_var.assign(bins, 0.0);
      if (cfg.keep_records) {
        o.record.kind = cfg.kind;
        o.record.lo_phase = cfg.lo_phase;
        o.record.seed = cfg.base_seed;
        o.record.stream_id = static_cast<std::uint64_t>(i);
      }
      auto observe = [&]() {
        const CMatrix rho = reduce_state(ct, field);
        o.pe.push_back(rho(1, 1).real());
        o.x.push_back((b.sx * rho).trace().real());
        o.y.push_back((b.sy * rho).trace().real());
        o.purity.push_back((rho * rho).trace().real());
      };
      try {
        observe();
        for (int k = 0; k < steps; ++k) {
          const double t = k * h;
          const int bin = k / every;
          const double u = rng.uniform(static_cast<std::uint64_t>(k), 0);
          int outcome = 0;
          int quad = 0;
          double expected = 0.0;
          double dw = 0.0;
          if (cfg.kind == RecordKind::counting) {
            outcome = stepper.counting_step(ct, t, h, u, &expected);
            o.clicks[bin] += outcome;
            o.jumps += outcome;
            o.innov[bin] += outcome - expected;
            o.innov_var[bin] += expected * (1.0 - expected);
          } else {
            double phase = cfg.lo_phase;
            if (cfg.kind == RecordKind::heterodyne) {
              quad = rng.uniform(static_cast<std::uint64_t>(k), 1) < 0.5 ? 0 : 1;
              phase = quad * std::numbers::pi / 2.0;
            }
            outcome = stepper.homodyne_step(ct, t, h, phase, u, &expected);
            dw = outcome * std::sqrt(h) - expected;
            o.innov[bin] += dw;
            o.innov_var[bin] += h - expected * expected;
          }
          if (cfg.keep_records) {
            o.record.times.push_back(t);
            o.record.outcomes.push_back(outcome);
            o.record.expected.push_back(expected);
            if (cfg.kind != RecordKind::counting) o.record.dW.push_back(dw);
            if (cfg.kind == RecordKind::heterodyne) o.record.quadrature.push_back(quad);
          }
          if ((k + 1) % every == 0 || k + 1 == steps) observe();
        }
      } catch (const DegenerateRecord&) {
        o.ok = false;
      }
    }
  }

  EnsembleResult res;
  const int nodes = bins + 1;
  for (int j = 0; j < nodes; ++j) res.times.push_back(std::min(j * every, steps) * h);
  res.pe_mean.assign(nodes, 0.0);
  res.pe_stderr.assign(nodes, 0.0);
  res.x_mean.assign(nodes, 0.0);
  res.y_mean.assign(nodes, 0.0);
  res.purity_mean.assign(nodes, 0.0);
  res.jump_rate_mean.assign(bins, 0.0);
  res.jump_rate_stderr.assign(bins, 0.0);
  res.innovation_sum.assign(bins, 0.0);
  res.innovation_var.assign(bins, 0.0);
  std::vector<double> pe_sq(nodes, 0.0), rate_sq(bins, 0.0);
  for (auto& o : outs) {
    if (!o.ok) {
      ++res.n_degenerate;
      continue;
    }
    ++res.n_ok;
    res.jump_counts.push_back(o.jumps);
    for (int j = 0; j < nodes; ++j) {
      res.pe_mean[j] += o.pe[j];
      pe_sq[j] += o.pe[j] * o.pe[j];
      res.x_mean[j] += o.x[j];
      res.y_mean[j] += o.y[j];
      res.purity_mean[j] += o.purity[j];
    }
    for (int j = 0; j < bins; ++j) {
      const int len = std::min(every, steps - j * every);
      const double rate = o.clicks[j] / (len * h);
      res.jump_rate_mean[j] += rate;
      rate_sq[j] += rate * rate;
      res.innovation_sum[j] += o.innov[j];
      res.innovation_var[j] += o.innov_var[j];
    }
    if (cfg.keep_records) res.records.push_back(std::move(o.record));
  }
  const double n = res.n_ok;
  if (n > 0) {
    auto finish = [n](double& mean, double sq, double& se) {
      mean /= n;
      const double var = n > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1.0)) : 0.0;
      se = std::sqrt(var / n);
    };
    for (int j = 0; j < nodes; ++j) {
      finish(res.pe_mean[j], pe_sq[j], res.pe_stderr[j]);
      res.x_mean[j] /= n;
      res.y_mean[j] /= n;
      res.purity_mean[j] /= n;
    }
    for (int j = 0; j < bins; ++j) finish(res.jump_rate_mean[j], rate_sq[j], res.jump_rate_stderr[j]);
  }
  return res;
}

Chi2Result martingale_chi2(const EnsembleResult& r) {
  Chi2Result c;
  for (std::size_t j = 0; j < r.innovation_sum.size(); ++j) {
    if (r.innovation_var[j] <= 0.0) continue;
    c.statistic += r.innovation_sum[j] * r.innovation_sum[j] / r.innovation_var[j];
    ++c.dof;
  }
  c.p_value = c.dof > 0 ? gsl_cdf_chisq_Q(c.statistic, c.dof) : 1.0;
  return c;
}

}  // namespace sqwp
